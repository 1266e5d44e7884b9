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

// Safety analysis of the mask-size-restricted defender.
//
// The defender treats masks of equal size alike and picks each of its H
// connections independently: mask-size class a with probability p_a, then a
// uniform node among the M_a nodes of that class. An attacker holding x_a
// nodes of class a wins with probability (sum_a p_a x_a / M_a)^H.

#ifndef PEERSHIELD_SAFETY_H_
#define PEERSHIELD_SAFETY_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "peershield/addr.h"
#include "peershield/cost.h"

namespace peershield {

// Census mask-size classes as aligned arrays, ascending by size.
struct SizeClasses {
  std::vector<std::size_t> sizes;
  Eigen::ArrayXd mass;   // M_a
  Eigen::ArrayXd masks;  // M_a / a

  static SizeClasses Of(const MaskCensus& census);
  Eigen::Index size() const { return static_cast<Eigen::Index>(sizes.size()); }
};

struct RestrictedDefender {
  std::map<std::size_t, double> weights;  // p_a per mask size
  int connections = 8;                    // H

  // p_a proportional to the number of masks of size a, i.e. a uniformly
  // random mask per connection.
  static RestrictedDefender UniformOverMasks(const MaskCensus& census, int connections);
  // Throws InputError unless weights are non-negative, sum to 1 within 1e-9,
  // and only sizes present in the census carry mass.
  void Validate(const MaskCensus& census) const;
  Eigen::ArrayXd WeightsFor(const SizeClasses& classes) const;
};

struct SafetyReport {
  double investment = 0.0;
  double success_prob = 0.0;
  double expected_utility = 0.0;  // investment - W_att * success_prob
  double bound = 0.0;
};

enum class BoundVariant {
  // Classes the attacker leaves alone contribute a factor of 1.
  kConservative,
  // Classes the attacker leaves alone contribute max(0, 1 - H p_a)^(1 / (H p_a)):
  // the x'_a substitution with y_a replaced by its mean H p_a.
  kLiteral,
};

// Throws InfeasibleError when some x_a exceeds M_a or names an absent size.
double SuccessProbability(const RestrictedDefender& def, const SizeAllocation& x,
                          const MaskCensus& census);

// sum_a x_a avg_a - W_att * prod_a f_a with f_a = x_a / M_a where x_a > 0.
double SafetyLowerBound(const RestrictedDefender& def, const SizeAllocation& x,
                        const MaskCensus& census, const MaskCost& cost, double w_att,
                        BoundVariant variant = BoundVariant::kConservative);

SafetyReport Evaluate(const RestrictedDefender& def, const SizeAllocation& x,
                      const MaskCensus& census, const MaskCost& cost, double w_att);

enum class SearchMode { kAuto, kExhaustive, kHeuristic };

struct BestResponse {
  SizeAllocation allocation;
  SafetyReport report;
  bool exhaustive = false;
};

// Allocation minimizing the defender's expected utility, optionally subject
// to investment <= budget. kAuto enumerates every allocation when
// prod_a (M_a + 1) <= kExhaustiveLimit and otherwise searches whole-mask
// purchases in cost-effectiveness order, one optional partial mask,
// equal-fraction allocations, and a local improvement pass.
inline constexpr double kExhaustiveLimit = 1e6;
BestResponse AttackerBestResponse(const RestrictedDefender& def, const MaskCensus& census,
                                  const MaskCost& cost, double w_att,
                                  std::optional<double> budget = std::nullopt,
                                  SearchMode mode = SearchMode::kAuto);

// Expected utility at the attacker's unconstrained best response.
double SafetyLevel(const RestrictedDefender& def, const MaskCensus& census, const MaskCost& cost,
                   double w_att);

// `budget,investment,success_prob,expected_utility,bound`
void WriteSafetyCsvHeader(std::ostream& out);
void WriteSafetyCsvRow(std::ostream& out, double budget, const SafetyReport& r);

}  // namespace peershield

#endif  // PEERSHIELD_SAFETY_H_
