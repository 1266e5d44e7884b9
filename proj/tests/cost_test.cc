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

#include <doctest.h>

#include "peershield/cost.h"
#include "peershield/errors.h"
#include "peershield/random.h"

using namespace peershield;

namespace {

PeerAddr A(const char* s) { return *ParseAddr(s); }

std::vector<PeerAddr> RandomSet(Rng& rng, std::size_t max) {
  std::vector<PeerAddr> s;
  const std::size_t n = rng.Uniform(max + 1);
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(PeerAddr{static_cast<uint32_t>((rng.Uniform(6) << 16) | rng.Uniform(8))});
  }
  return s;
}

}  // namespace

TEST_CASE("set cost examples") {
  const CostModel mask = CostModel::Mask(10, 1);
  const std::vector<PeerAddr> one_mask{A("10.1.0.1"), A("10.1.0.2")};
  const std::vector<PeerAddr> two_masks{A("10.1.0.1"), A("11.2.0.1"), A("11.2.3.4")};
  CHECK(mask(one_mask) == 12.0);
  CHECK(mask(two_masks) == 23.0);
  CHECK(mask(std::vector<PeerAddr>{}) == 0.0);
  CHECK(CostModel::Constant(2.5)(std::vector<PeerAddr>{}) == 0.0);
  CHECK(CostModel::Constant(2.5)(two_masks) == 7.5);
  // Duplicates count once.
  const std::vector<PeerAddr> dup{A("10.1.0.1"), A("10.1.0.1")};
  CHECK(mask(dup) == 11.0);
  CHECK(mask.Of(2, 3) == 23.0);
}

TEST_CASE("invalid cost parameters") {
  CHECK_THROWS_AS(CostModel::Constant(-1), InputError);
  CHECK_THROWS_AS(CostModel::Mask(-1, 1), InputError);
  CHECK_THROWS_AS(CostModel::Mask(1, -1), InputError);
  CHECK_THROWS_AS(CostModel::Mask(1, 1, 0), InputError);
  CHECK_THROWS_AS(CostModel::Mask(1, 1, 33), InputError);
}

TEST_CASE("average node cost") {
  CHECK(AvgNodeCost(MaskCost{10, 1, 16}, 1) == 11.0);
  CHECK(AvgNodeCost(MaskCost{10, 1, 16}, 10) == 2.0);
  for (std::size_t a = 1; a < 50; ++a) CHECK(AvgNodeCost(MaskCost{0, 1, 16}, a) == 1.0);
  CHECK_THROWS_AS(AvgNodeCost(MaskCost{10, 1, 16}, 0), InputError);
  for (std::size_t a = 1; a < 50; ++a) {
    CHECK(AvgNodeCost(MaskCost{10, 1, 16}, a + 1) < AvgNodeCost(MaskCost{10, 1, 16}, a));
    CHECK(AvgNodeCost(MaskCost{10, 1, 16}, a) == doctest::Approx(1.0 + 10.0 / static_cast<double>(a)));
  }
}

TEST_CASE("cost monotone under inclusion") {
  Rng rng(5);
  const CostModel models[] = {CostModel::Mask(10, 1), CostModel::Mask(3.5, 0.25, 8), CostModel::Constant(2)};
  for (int round = 0; round < 500; ++round) {
    std::vector<PeerAddr> small = RandomSet(rng, 10);
    std::vector<PeerAddr> big = small;
    for (PeerAddr a : RandomSet(rng, 10)) big.push_back(a);
    for (const auto& m : models) CHECK(m(small) <= m(big));
  }
}

TEST_CASE("mask cost without per-mask charge is constant cost") {
  Rng rng(9);
  for (int round = 0; round < 500; ++round) {
    const std::vector<PeerAddr> s = RandomSet(rng, 20);
    CHECK(CostModel::Mask(0, 1.75)(s) == CostModel::Constant(1.75)(s));
  }
}

TEST_CASE("min cost for allocation") {
  std::map<MaskId, std::size_t> counts{{MaskId{1u << 16, 16}, 2}, {MaskId{2u << 16, 16}, 2},
                                       {MaskId{3u << 16, 16}, 1}};
  const MaskCensus census(counts, 16);
  const MaskCost cost{10, 1, 16};
  CHECK(MinCostForAllocation(cost, {{2, 2}}, census) == 12.0);
  CHECK(MinCostForAllocation(cost, {{2, 3}}, census) == 23.0);
  CHECK(3 * AvgNodeCost(cost, 2) == 18.0);
  CHECK(MinCostForAllocation(cost, {}, census) == 0.0);
  CHECK_THROWS_AS(MinCostForAllocation(cost, {{2, 5}}, census), InfeasibleError);
  CHECK_THROWS_AS(MinCostForAllocation(cost, {{7, 1}}, census), InfeasibleError);

  // Never below the average-cost bound; equal exactly when masks are whole.
  Rng rng(13);
  std::map<MaskId, std::size_t> big;
  for (uint32_t m = 1; m <= 30; ++m) big[MaskId{m << 16, 16}] = 1 + m % 6;
  const MaskCensus c(big, 16);
  for (int round = 0; round < 500; ++round) {
    SizeAllocation x;
    double bound = 0.0;
    bool whole = true;
    for (const auto& [size, mass] : c.size_histogram()) {
      const std::size_t k = rng.Uniform(mass + 1);
      if (k == 0) continue;
      x[size] = k;
      bound += static_cast<double>(k) * AvgNodeCost(cost, size);
      whole = whole && k % size == 0;
    }
    const double exact = MinCostForAllocation(cost, x, c);
    CHECK(exact >= bound - 1e-9);
    if (whole) CHECK(exact == doctest::Approx(bound));
    else CHECK(exact > bound);
  }
}
