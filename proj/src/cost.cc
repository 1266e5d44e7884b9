// Copyright 2026 The peershield Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "peershield/cost.h"

#include <set>
#include <string>

#include "peershield/errors.h"

namespace peershield {
namespace {

void RequireNonNegative(double v, const char* name) {
  if (!(v >= 0.0)) throw InputError(std::string(name) + " must be a non-negative number");
}

}  // namespace

CostModel::CostModel(ConstantCost c) : variant_(c) { RequireNonNegative(c.per_node, "c"); }

CostModel::CostModel(MaskCost c) : variant_(c) {
  RequireNonNegative(c.c_new, "c_new");
  RequireNonNegative(c.c_node, "c_node");
  MaskOf(PeerAddr{}, c.prefix_len);  // validates the prefix length
}

double CostModel::operator()(std::span<const PeerAddr> set) const {
  std::set<PeerAddr> nodes(set.begin(), set.end());
  if (const auto* c = std::get_if<ConstantCost>(&variant_)) {
    return c->per_node * static_cast<double>(nodes.size());
  }
  const auto& m = std::get<MaskCost>(variant_);
  std::set<MaskId> masks;
  for (PeerAddr a : nodes) masks.insert(MaskOf(a, m.prefix_len));
  return Of(masks.size(), nodes.size());
}

double CostModel::Of(std::size_t num_masks, std::size_t num_nodes) const {
  if (const auto* c = std::get_if<ConstantCost>(&variant_)) {
    return c->per_node * static_cast<double>(num_nodes);
  }
  const auto& m = std::get<MaskCost>(variant_);
  return m.c_new * static_cast<double>(num_masks) + m.c_node * static_cast<double>(num_nodes);
}

int CostModel::equivalence_prefix_len() const {
  if (const auto* m = std::get_if<MaskCost>(&variant_)) return m->prefix_len;
  return 0;
}

double AvgNodeCost(const MaskCost& cost, std::size_t mask_size) {
  if (mask_size == 0) throw InputError("mask size must be at least 1");
  const double a = static_cast<double>(mask_size);
  return (cost.c_new + a * cost.c_node) / a;
}

double MinCostForAllocation(const MaskCost& cost, const SizeAllocation& x,
                            const MaskCensus& census) {
  double total = 0.0;
  for (const auto& [size, count] : x) {
    if (count == 0) continue;
    if (size == 0 || count > census.mass_of_size(size)) {
      throw InfeasibleError("allocation of " + std::to_string(count) +
                            " nodes in masks of size " + std::to_string(size) +
                            " exceeds the census (M_a = " +
                            std::to_string(census.mass_of_size(size)) + ")");
    }
    const std::size_t masks = (count + size - 1) / size;
    total += cost.c_new * static_cast<double>(masks) + cost.c_node * static_cast<double>(count);
  }
  return total;
}

}  // namespace peershield
