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

// Attacker acquisition costs for sets of peers.

#ifndef PEERSHIELD_COST_H_
#define PEERSHIELD_COST_H_

#include <cstddef>
#include <map>
#include <span>
#include <variant>

#include "peershield/addr.h"

namespace peershield {

// C(U) = c * |U|.
struct ConstantCost {
  double per_node = 1.0;
};

// C(U) = c_new * (number of distinct masks in U) + c_node * |U|.
struct MaskCost {
  double c_new = 10.0;
  double c_node = 1.0;
  int prefix_len = kDefaultPrefixLen;
};

// Placeholder economics shipped as a fixture: c_new / c_node = 10. Not
// derived from any measured price list.
inline constexpr MaskCost kDefaultMaskCost{10.0, 1.0, kDefaultPrefixLen};

class CostModel {
 public:
  // Throws InputError for negative costs or an invalid prefix length.
  CostModel(ConstantCost c);  // NOLINT(runtime/explicit)
  CostModel(MaskCost c);      // NOLINT(runtime/explicit)

  static CostModel Constant(double per_node) { return CostModel(ConstantCost{per_node}); }
  static CostModel Mask(double c_new, double c_node, int prefix_len = kDefaultPrefixLen) {
    return CostModel(MaskCost{c_new, c_node, prefix_len});
  }

  // Set semantics: duplicate addresses are counted once.
  double operator()(std::span<const PeerAddr> set) const;
  // Cost of a set described only by its shape.
  double Of(std::size_t num_masks, std::size_t num_nodes) const;

  bool is_mask_based() const { return std::holds_alternative<MaskCost>(variant_); }
  const std::variant<ConstantCost, MaskCost>& variant() const { return variant_; }
  // Grouping that leaves the cost invariant: the mask for MaskCost, a single
  // group for ConstantCost.
  int equivalence_prefix_len() const;

 private:
  std::variant<ConstantCost, MaskCost> variant_;
};

// Average per-node cost of buying a whole mask of `mask_size` nodes:
// (c_new + a * c_node) / a. Throws InputError for a == 0.
double AvgNodeCost(const MaskCost& cost, std::size_t mask_size);

// Corrupted-node counts per mask size: x[a] nodes inside masks of size a.
using SizeAllocation = std::map<std::size_t, std::size_t>;

// Cheapest purchase of x[a] nodes in size-a masks, packing whole masks:
// sum_a c_new * ceil(x[a] / a) + c_node * x[a]. Always >= sum_a x[a] * avg_a.
// Throws InfeasibleError when some x[a] exceeds M_a.
double MinCostForAllocation(const MaskCost& cost, const SizeAllocation& x,
                            const MaskCensus& census);

}  // namespace peershield

#endif  // PEERSHIELD_COST_H_
