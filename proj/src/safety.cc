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

#include "peershield/safety.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "peershield/errors.h"

namespace peershield {
namespace {

struct Problem {
  SizeClasses classes;
  Eigen::ArrayXd p;
  Eigen::ArrayXd a;  // mask size per class
  MaskCost cost;
  double w_att;
  int connections;
  double budget;

  double Investment(const Eigen::ArrayXd& x) const {
    return (cost.c_new * (x / a).ceil() + cost.c_node * x).sum();
  }
  double Success(const Eigen::ArrayXd& x) const {
    return std::pow((p * x / classes.mass).sum(), connections);
  }
};

struct Scored {
  Eigen::ArrayXd x;
  double investment = 0.0;
  double utility = 0.0;
  bool valid = false;
};

// Lower utility wins; near-ties go to the cheaper allocation.
bool Better(double eu, double inv, const Scored& best) {
  if (!best.valid) return true;
  const double tol = 1e-12 * std::max({1.0, std::abs(eu), std::abs(best.utility)});
  if (eu < best.utility - tol) return true;
  return eu <= best.utility + tol && inv < best.investment - 1e-12;
}

class Searcher {
 public:
  explicit Searcher(const Problem& pb) : pb_(pb) {}

  void Consider(const Eigen::ArrayXd& x) {
    if ((x < 0).any() || (x > pb_.classes.mass).any()) return;
    const double inv = pb_.Investment(x);
    if (inv > pb_.budget + 1e-9) return;
    const double eu = inv - pb_.w_att * pb_.Success(x);
    if (Better(eu, inv, best_)) best_ = Scored{x, inv, eu, true};
  }

  const Scored& best() const { return best_; }

 private:
  const Problem& pb_;
  Scored best_;
};

SizeAllocation ToAllocation(const SizeClasses& classes, const Eigen::ArrayXd& x) {
  SizeAllocation out;
  for (Eigen::Index i = 0; i < classes.size(); ++i) {
    if (x(i) > 0) out[classes.sizes[static_cast<std::size_t>(i)]] = static_cast<std::size_t>(x(i));
  }
  return out;
}

Eigen::ArrayXd FromAllocation(const SizeClasses& classes, const SizeAllocation& alloc) {
  Eigen::ArrayXd x = Eigen::ArrayXd::Zero(classes.size());
  for (const auto& [size, count] : alloc) {
    if (count == 0) continue;
    auto it = std::find(classes.sizes.begin(), classes.sizes.end(), size);
    if (it == classes.sizes.end()) {
      throw InfeasibleError("allocation names mask size " + std::to_string(size) +
                            " absent from the census");
    }
    const auto i = it - classes.sizes.begin();
    if (static_cast<double>(count) > classes.mass(i)) {
      throw InfeasibleError("allocation of " + std::to_string(count) + " nodes in masks of size " +
                            std::to_string(size) + " exceeds M_a");
    }
    x(i) = static_cast<double>(count);
  }
  return x;
}

Problem MakeProblem(const RestrictedDefender& def, const MaskCensus& census, const MaskCost& cost,
                    double w_att, std::optional<double> budget) {
  def.Validate(census);
  Problem pb{SizeClasses::Of(census), {}, {}, cost, w_att, def.connections,
             budget.value_or(std::numeric_limits<double>::infinity())};
  pb.p = def.WeightsFor(pb.classes);
  pb.a = Eigen::ArrayXd(pb.classes.size());
  for (Eigen::Index i = 0; i < pb.classes.size(); ++i) {
    pb.a(i) = static_cast<double>(pb.classes.sizes[static_cast<std::size_t>(i)]);
  }
  return pb;
}

void SearchExhaustive(const Problem& pb, Searcher& s) {
  const Eigen::Index k = pb.classes.size();
  Eigen::ArrayXd x = Eigen::ArrayXd::Zero(k);
  for (;;) {
    s.Consider(x);
    Eigen::Index i = 0;
    while (i < k && x(i) >= pb.classes.mass(i)) x(i++) = 0;
    if (i == k) break;
    x(i) += 1;
  }
}

void SearchHeuristic(const Problem& pb, Searcher& s) {
  const Eigen::Index k = pb.classes.size();
  const double c_new = pb.cost.c_new;
  const double c_node = pb.cost.c_node;

  // Extra nodes in one partially bought mask: the utility is concave in the
  // node count, so only the extreme counts can be optimal.
  auto consider_partials = [&](const Eigen::ArrayXd& base) {
    const double spare = pb.budget - pb.Investment(base);
    for (Eigen::Index b = 0; b < k; ++b) {
      const double room = std::min(pb.classes.mass(b) - base(b), pb.a(b) - 1);
      if (room < 1) continue;
      double affordable = room;
      if (std::isfinite(spare)) {
        affordable = c_node > 0 ? std::floor((spare - c_new) / c_node) : (spare >= c_new ? room : 0);
      }
      for (double r : {1.0, room, std::min(room, affordable)}) {
        if (r < 1) continue;
        Eigen::ArrayXd x = base;
        x(b) += r;
        s.Consider(x);
      }
    }
  };

  // Whole masks in decreasing order of (selection weight gained) / (cost).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](Eigen::Index i) {
    const double kappa = c_new + pb.a(i) * c_node;
    const double nu = pb.p(i) * pb.a(i) / pb.classes.mass(i);
    return kappa > 0 ? nu / kappa : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) { return ratio(l) > ratio(r); });

  Eigen::ArrayXd x = Eigen::ArrayXd::Zero(k);
  s.Consider(x);
  consider_partials(x);
  for (Eigen::Index i : order) {
    for (double m = 0; m < pb.classes.masks(i); ++m) {
      x(i) += pb.a(i);
      if (pb.Investment(x) > pb.budget + 1e-9) {
        x(i) -= pb.a(i);
        break;
      }
      s.Consider(x);
      consider_partials(x);
    }
  }

  // Equal corrupted fraction in every class.
  constexpr int kFractionSteps = 256;
  for (int g = 1; g <= kFractionSteps; ++g) {
    const double f = static_cast<double>(g) / kFractionSteps;
    s.Consider((pb.a * (f * pb.classes.masks).ceil()).min(pb.classes.mass));
    s.Consider((f * pb.classes.mass).round());
  }

  // Local improvement over single-node, single-mask and transfer moves.
  for (int iter = 0; iter < 100000; ++iter) {
    const Scored before = s.best();
    const Eigen::ArrayXd cur = before.x;
    for (Eigen::Index i = 0; i < k; ++i) {
      for (double d : {1.0, -1.0, pb.a(i), -pb.a(i)}) {
        Eigen::ArrayXd y = cur;
        y(i) += d;
        s.Consider(y);
      }
      for (Eigen::Index j = 0; j < k; ++j) {
        if (i == j) continue;
        Eigen::ArrayXd y = cur;
        y(i) -= pb.a(i);
        y(j) += pb.a(j);
        s.Consider(y);
        y = cur;
        y(i) -= 1;
        y(j) += 1;
        s.Consider(y);
      }
    }
    if ((s.best().x == before.x).all()) break;
  }
}

}  // namespace

SizeClasses SizeClasses::Of(const MaskCensus& census) {
  SizeClasses c;
  const auto& hist = census.size_histogram();
  c.mass.resize(static_cast<Eigen::Index>(hist.size()));
  c.masks.resize(static_cast<Eigen::Index>(hist.size()));
  Eigen::Index i = 0;
  for (const auto& [size, mass] : hist) {
    c.sizes.push_back(size);
    c.mass(i) = static_cast<double>(mass);
    c.masks(i) = static_cast<double>(mass / size);
    ++i;
  }
  return c;
}

RestrictedDefender RestrictedDefender::UniformOverMasks(const MaskCensus& census, int connections) {
  RestrictedDefender def;
  def.connections = connections;
  const double total = static_cast<double>(census.num_masks());
  for (const auto& [size, mass] : census.size_histogram()) {
    def.weights[size] = static_cast<double>(mass / size) / total;
  }
  return def;
}

void RestrictedDefender::Validate(const MaskCensus& census) const {
  if (connections < 1) throw InputError("H must be at least 1");
  double sum = 0.0;
  for (const auto& [size, w] : weights) {
    if (!(w >= 0.0)) throw InputError("selection weights must be non-negative");
    if (w > 0.0 && census.mass_of_size(size) == 0) {
      throw InputError("selection weight on mask size " + std::to_string(size) +
                       " which the census does not contain");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("selection weights must sum to 1");
}

Eigen::ArrayXd RestrictedDefender::WeightsFor(const SizeClasses& classes) const {
  Eigen::ArrayXd p = Eigen::ArrayXd::Zero(classes.size());
  for (Eigen::Index i = 0; i < classes.size(); ++i) {
    auto it = weights.find(classes.sizes[static_cast<std::size_t>(i)]);
    if (it != weights.end()) p(i) = it->second;
  }
  return p;
}

double SuccessProbability(const RestrictedDefender& def, const SizeAllocation& x,
                          const MaskCensus& census) {
  def.Validate(census);
  const SizeClasses classes = SizeClasses::Of(census);
  const Eigen::ArrayXd counts = FromAllocation(classes, x);
  return std::pow((def.WeightsFor(classes) * counts / classes.mass).sum(), def.connections);
}

double SafetyLowerBound(const RestrictedDefender& def, const SizeAllocation& x,
                        const MaskCensus& census, const MaskCost& cost, double w_att,
                        BoundVariant variant) {
  def.Validate(census);
  const SizeClasses classes = SizeClasses::Of(census);
  const Eigen::ArrayXd counts = FromAllocation(classes, x);
  const Eigen::ArrayXd p = def.WeightsFor(classes);
  double spend = 0.0;
  double product = 1.0;
  for (Eigen::Index i = 0; i < classes.size(); ++i) {
    const std::size_t a = classes.sizes[static_cast<std::size_t>(i)];
    if (counts(i) > 0) {
      spend += counts(i) * AvgNodeCost(cost, a);
      product *= counts(i) / classes.mass(i);
    } else if (variant == BoundVariant::kLiteral) {
      const double mean = def.connections * p(i);
      if (mean > 0) product *= std::pow(std::max(0.0, 1.0 - mean), 1.0 / mean);
    }
  }
  return spend - w_att * product;
}

SafetyReport Evaluate(const RestrictedDefender& def, const SizeAllocation& x,
                      const MaskCensus& census, const MaskCost& cost, double w_att) {
  SafetyReport r;
  r.investment = MinCostForAllocation(cost, x, census);
  r.success_prob = SuccessProbability(def, x, census);
  r.expected_utility = r.investment - w_att * r.success_prob;
  r.bound = SafetyLowerBound(def, x, census, cost, w_att);
  return r;
}

BestResponse AttackerBestResponse(const RestrictedDefender& def, const MaskCensus& census,
                                  const MaskCost& cost, double w_att, std::optional<double> budget,
                                  SearchMode mode) {
  if (census.empty()) throw InputError("best response on an empty census");
  const Problem pb = MakeProblem(def, census, cost, w_att, budget);
  const double space = (pb.classes.mass + 1).prod();
  const bool exhaustive = mode == SearchMode::kExhaustive ||
                          (mode == SearchMode::kAuto && space <= kExhaustiveLimit);
  Searcher s(pb);
  if (exhaustive) {
    SearchExhaustive(pb, s);
  } else {
    SearchHeuristic(pb, s);
  }
  BestResponse out;
  out.allocation = ToAllocation(pb.classes, s.best().x);
  out.report = Evaluate(def, out.allocation, census, cost, w_att);
  out.exhaustive = exhaustive;
  return out;
}

double SafetyLevel(const RestrictedDefender& def, const MaskCensus& census, const MaskCost& cost,
                   double w_att) {
  return AttackerBestResponse(def, census, cost, w_att).report.expected_utility;
}

void WriteSafetyCsvHeader(std::ostream& out) {
  out << "budget,investment,success_prob,expected_utility,bound\n";
}

namespace {

// Shortest text that reads back to the same double.
std::string Shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void WriteSafetyCsvRow(std::ostream& out, double budget, const SafetyReport& r) {
  out << Shortest(budget) << ',' << Shortest(r.investment) << ',' << Shortest(r.success_prob) << ','
      << Shortest(r.expected_utility) << ',' << Shortest(r.bound) << '\n';
}

}  // namespace peershield
