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

// Attack-success-versus-investment benchmark.
//
// The network is a census of masks. The attacker spends its budget
// corrupting existing nodes, then every node is announced to the victim:
// honest nodes once, corrupted nodes `retransmission_factor` times, the two
// streams spread evenly over each other. The victim ingests the stream with
// one of three buffer policies, picks H connections, and is isolated when
// all H belong to the attacker.

#ifndef PEERSHIELD_SIM_H_
#define PEERSHIELD_SIM_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "peershield/addr.h"
#include "peershield/buffer.h"
#include "peershield/cost.h"
#include "peershield/random.h"

namespace peershield {

inline constexpr std::size_t kNaiveCapacity = 20480;

// Fixed-capacity buffer that only rejects addresses it currently holds and
// evicts a uniform record on overflow.
struct NaiveUniformPolicy {
  std::size_t capacity = kNaiveCapacity;
};

// Uniform reservoir over every filter-passing address: one global bucket.
struct NaiveWithFilterPolicy {
  std::size_t capacity = kNaiveCapacity;
};

// Per-mask buckets. Each connection picks a mask-size class (sized by the
// bucket history) with probability p_a, then a uniform bucket of that class.
// `bucket_size` 0 means H. Empty `weights` means uniform over buckets.
struct MaskBucketedPolicy {
  int prefix_len = kDefaultPrefixLen;
  std::size_t bucket_size = 0;
  std::map<std::size_t, double> weights;
};

using DefenderPolicy = std::variant<NaiveUniformPolicy, NaiveWithFilterPolicy, MaskBucketedPolicy>;

// "naive", "naive_filter", "bucketed".
std::string PolicyName(const DefenderPolicy& policy);

struct AttackScenario {
  MaskCensus census;
  MaskCost cost;
  // Large enough that the attacker converts the whole budget.
  double w_att = 1e30;
  std::vector<double> budgets;
  uint64_t retransmission_factor = 100;
  int connections = 8;  // H
  std::size_t trials = 1000;
  uint64_t seed = 1;
  double bloom_fpr = 1e-3;

  // Nonempty census, ascending nonnegative budgets, r >= 1, H >= 1,
  // trials >= 1, 0 < fpr < 1.
  void Validate() const;
};

struct CurvePoint {
  double budget = 0.0;
  double spent = 0.0;
  std::size_t attacker_nodes = 0;
  double success = 0.0;
  double stderr_ = 0.0;
  // (sum_a p_a x_a / M_a)^H for the bucketed policy; unset otherwise.
  std::optional<double> analytic;
};

struct AttackOutcomeCurve {
  std::string policy;
  std::vector<CurvePoint> points;
};

// Node counts the attacker holds in each mask, keyed like the census.
using MaskAllocation = std::map<MaskId, std::size_t>;

// Greedy address-count maximization: masks largest first, each bought whole
// when affordable and otherwise as large a partial as the remainder allows.
MaskAllocation FloodingAllocation(const MaskCensus& census, const MaskCost& cost, double budget);

// Size-class allocation spread over concrete masks in census order: whole
// masks first, the remainder in one further mask.
MaskAllocation SpreadAllocation(const MaskCensus& census, const SizeAllocation& x);

double AllocationCost(const MaskCost& cost, const MaskAllocation& alloc);

// Census with `count` masks of each `size`, on consecutive prefixes starting
// at 1.0.0.0/16.
MaskCensus SyntheticCensus(const std::map<std::size_t, std::size_t>& masks_per_size,
                           int prefix_len = kDefaultPrefixLen);

// Cost of the cheapest whole mask and of the whole census.
double CheapestMaskCost(const MaskCensus& census, const MaskCost& cost);
double FullBuyoutCost(const MaskCensus& census, const MaskCost& cost);

AttackOutcomeCurve RunScenario(const DefenderPolicy& policy, const AttackScenario& scenario);

struct BudgetComparison {
  double budget = 0.0;
  std::string ordering;  // e.g. "bucketed<naive_filter<naive"
};

struct DominanceSummary {
  double range_low = 0.0;   // cheapest whole mask
  double range_high = 0.0;  // every mask covered
  std::vector<BudgetComparison> per_budget;
  // Budgets in range where bucketed exceeds a naive policy by more than
  // 3 sqrt(se_b^2 + se_n^2), as "policy@budget".
  std::vector<std::string> violations;
  // First budget with naive success >= 0.99 and bucketed success <= 0.01.
  std::optional<double> overwhelmed_budget;
  // At budgets >= range_high, bucketed within 3 combined standard errors of
  // every naive policy.
  bool converges_at_full_coverage = true;

  bool dominance_holds() const { return violations.empty(); }
};

struct PolicyComparison {
  std::vector<AttackOutcomeCurve> curves;
  DominanceSummary summary;
};

// Runs `policies` (default: the three policies with default settings) and
// summarizes. Curves for "naive"/"naive_filter" and "bucketed" feed the
// summary when present.
PolicyComparison ComparePolicies(const AttackScenario& scenario,
                                 std::vector<DefenderPolicy> policies = {});

// `policy,budget,success,stderr`
void WriteCurvesCsv(const std::vector<AttackOutcomeCurve>& curves, std::ostream& out);

}  // namespace peershield

#endif  // PEERSHIELD_SIM_H_
