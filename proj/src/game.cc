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

#include "peershield/game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

namespace peershield {
namespace {

template <typename Scalar>
Eigen::VectorXd ToDouble(const VectorX<Scalar>& v) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return v;
  } else {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(i).template convert_to<double>();
    return out;
  }
}

template <typename Scalar>
double ToDouble(const Scalar& s) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return s;
  } else {
    return s.template convert_to<double>();
  }
}

}  // namespace

void GameSpec::Validate() const {
  std::set<PeerAddr> distinct(universe.begin(), universe.end());
  if (distinct.size() != universe.size()) throw InputError("universe contains duplicate addresses");
  if (universe.size() > 32) throw SizeGuardError("universe larger than 32 peers");
  if (connections < 1 || static_cast<std::size_t>(connections) > universe.size()) {
    throw InputError("H must satisfy 1 <= H <= |V|");
  }
  if (!(w_att >= 0.0)) throw InputError("W_att must be non-negative");
}

Game::Game(GameSpec spec, AttackerSpaceOptions opts) : spec_(std::move(spec)) {
  spec_.Validate();
  const int n = universe_size();
  if (n > kMaxUniverse) {
    throw SizeGuardError("universe of " + std::to_string(n) + " peers exceeds the " +
                         std::to_string(kMaxUniverse) +
                         "-peer limit for the full game; use the reduced game");
  }

  const int prefix_len = spec_.cost.equivalence_prefix_len();
  std::map<MaskId, int> group_ids;
  group_.reserve(spec_.universe.size());
  for (PeerAddr a : spec_.universe) {
    const MaskId key = prefix_len == 0 ? MaskId{0, 0} : MaskOf(a, prefix_len);
    auto [it, inserted] = group_ids.try_emplace(key, static_cast<int>(group_ids.size()));
    group_.push_back(it->second);
  }
  num_groups_ = static_cast<int>(group_ids.size());

  const NodeSet limit = NodeSet{1} << n;
  for (NodeSet s = 0; s < limit; ++s) {
    if (SetSize(s) == spec_.connections) strategies_.defender.push_back(s);
  }
  strategies_.attacker.push_back(0);
  for (NodeSet s = 1; s < limit; ++s) {
    const double c = Cost(s);
    if (opts.cost_cap && c > *opts.cost_cap) continue;
    if (opts.prune_dominated && (SetSize(s) < spec_.connections || c > spec_.w_att)) continue;
    strategies_.attacker.push_back(s);
  }
}

double Game::Cost(NodeSet b) const {
  uint64_t masks = 0;
  for (NodeSet s = b; s != 0; s &= s - 1) masks |= uint64_t{1} << group_[std::countr_zero(s)];
  if (spec_.cost.is_mask_based()) {
    return spec_.cost.Of(static_cast<std::size_t>(std::popcount(masks)),
                         static_cast<std::size_t>(SetSize(b)));
  }
  return spec_.cost.Of(0, static_cast<std::size_t>(SetSize(b)));
}

NodeSet Game::ToSet(std::span<const PeerAddr> addrs) const {
  NodeSet s = 0;
  for (PeerAddr a : addrs) {
    auto it = std::find(spec_.universe.begin(), spec_.universe.end(), a);
    if (it == spec_.universe.end()) throw InputError(ToString(a) + " is not in the universe");
    s |= NodeSet{1} << (it - spec_.universe.begin());
  }
  return s;
}

std::vector<PeerAddr> Game::ToAddrs(NodeSet s) const {
  std::vector<PeerAddr> out;
  for (; s != 0; s &= s - 1) out.push_back(spec_.universe[static_cast<std::size_t>(std::countr_zero(s))]);
  return out;
}

std::vector<int> Game::Signature(NodeSet s) const {
  std::vector<int> counts(static_cast<std::size_t>(num_groups_), 0);
  for (; s != 0; s &= s - 1) ++counts[static_cast<std::size_t>(group_[std::countr_zero(s)])];
  return counts;
}

double Game::Coverage(const Eigen::VectorXd& defender, NodeSet b) const {
  double covered = 0.0;
  const auto& d = strategies_.defender;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (IsSubset(d[i], b)) covered += defender(static_cast<Eigen::Index>(i));
  }
  return covered;
}

double Game::SafetyLevel(const Eigen::VectorXd& defender) const {
  double level = std::numeric_limits<double>::infinity();
  const NodeSet limit = NodeSet{1} << universe_size();
  for (NodeSet b = 0; b < limit; ++b) {
    level = std::min(level, Cost(b) - spec_.w_att * Coverage(defender, b));
  }
  return level;
}

double Game::DefenderBestResponse(const Eigen::VectorXd& attacker) const {
  const auto& a = strategies_.attacker;
  double spend = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) spend += attacker(static_cast<Eigen::Index>(j)) * Cost(a[j]);
  double best = -std::numeric_limits<double>::infinity();
  for (NodeSet d : strategies_.defender) {
    double hit = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (IsSubset(d, a[j])) hit += attacker(static_cast<Eigen::Index>(j));
    }
    best = std::max(best, spend - spec_.w_att * hit);
  }
  return best;
}

double Utility(const Game& game, std::span<const PeerAddr> a, std::span<const PeerAddr> b) {
  const NodeSet sa = game.ToSet(a);
  if (SetSize(sa) != game.spec().connections || a.size() != static_cast<std::size_t>(SetSize(sa))) {
    throw InputError("defender set must hold exactly H distinct peers");
  }
  return game.Utility(sa, game.ToSet(b));
}

bool IsDistribution(const Eigen::VectorXd& p, double tol) {
  return p.size() > 0 && p.minCoeff() >= -tol && std::abs(p.sum() - 1.0) <= tol;
}

template <typename Scalar>
Equilibrium<Scalar> Solve(const Game& game) {
  const auto& s = game.strategies();
  const std::size_t rows = s.defender.size() + 1;
  const std::size_t cols = s.attacker.size() + s.defender.size() + 1;
  if (rows * cols > Game::kMaxTableauCells) {
    throw SizeGuardError("game with " + std::to_string(s.defender.size()) + " x " +
                         std::to_string(s.attacker.size()) +
                         " pure strategies is too large to solve directly; use the reduced game");
  }
  const ZeroSumSolution<Scalar> sol = SolveZeroSum(game.Payoff<Scalar>());
  Equilibrium<Scalar> eq{sol.row_strategy, sol.col_strategy, sol.value, 0.0};
  eq.gap = game.DefenderBestResponse(ToDouble(eq.attacker)) - game.SafetyLevel(ToDouble(eq.defender));
  return eq;
}

template Equilibrium<double> Solve<double>(const Game&);
template Equilibrium<Rational> Solve<Rational>(const Game&);

Equilibrium<double> SolveCertified(const Game& game, double max_gap) {
  Equilibrium<double> eq = Solve<double>(game);
  if (!(eq.gap <= max_gap)) {
    throw std::runtime_error("solver certificate failed: best-response gap " + std::to_string(eq.gap));
  }
  return eq;
}

bool CheckSafetyUnderSmallerDamage(const GameSpec& spec, double w1, double w2,
                                   const Eigen::VectorXd& defender, double level, double tol) {
  if (w2 > w1) throw InputError("expected W2 <= W1");
  GameSpec s = spec;
  s.w_att = w1;
  const Game game(s, AttackerSpaceOptions{.prune_dominated = false, .cost_cap = std::nullopt});
  const NodeSet limit = NodeSet{1} << game.universe_size();
  for (NodeSet b = 0; b < limit; ++b) {
    const double cost = game.Cost(b);
    const double covered = game.Coverage(defender, b);
    const double u1 = cost - w1 * covered;
    const double u2 = cost - w2 * covered;
    if (u2 < u1 - tol || u2 < level - tol) return false;
  }
  return true;
}

bool CheckSupportDichotomy(const Game& game, const Equilibrium<double>& eq, double tol) {
  const auto& a = game.strategies().attacker;
  std::vector<NodeSet> support;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (eq.attacker(static_cast<Eigen::Index>(j)) > tol && a[j] != 0) support.push_back(a[j]);
  }
  if (support.empty()) return true;
  for (NodeSet d : game.strategies().defender) {
    if (std::none_of(support.begin(), support.end(), [d](NodeSet b) { return IsSubset(d, b); })) {
      return false;
    }
  }
  return true;
}

bool CheckCostCoverageOrder(const Game& game, const Equilibrium<double>& eq, double tol) {
  const auto& a = game.strategies().attacker;
  std::vector<std::pair<double, double>> support;  // (cost, coverage)
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (eq.attacker(static_cast<Eigen::Index>(j)) > tol) {
      support.emplace_back(game.Cost(a[j]), game.Coverage(eq.defender, a[j]));
    }
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (std::size_t k = i + 1; k < support.size(); ++k) {
      const double dc = support[i].first - support[k].first;
      const double dv = support[i].second - support[k].second;
      const bool cost_equal = std::abs(dc) <= tol;
      const bool cover_equal = std::abs(dv) <= tol;
      if (cost_equal != cover_equal) return false;
      if (!cost_equal && (dc > 0) != (dv > 0)) return false;
    }
  }
  return true;
}

ReducedGame::ReducedGame(const Game& game) : game_(&game) {
  std::map<std::vector<int>, std::size_t> index;
  const auto& d = game.strategies().defender;
  class_of_.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto [it, inserted] = index.try_emplace(game.Signature(d[i]), classes_.size());
    if (inserted) classes_.emplace_back();
    classes_[it->second].push_back(i);
    class_of_[i] = it->second;
  }
}

Eigen::VectorXd ReducedGame::SymmetrizeAttacker(const Eigen::VectorXd& attacker) const {
  const auto& a = game_->strategies().attacker;
  std::map<std::vector<int>, std::vector<std::size_t>> orbits;
  for (std::size_t j = 0; j < a.size(); ++j) orbits[game_->Signature(a[j])].push_back(j);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(attacker.size());
  for (const auto& [sig, members] : orbits) {
    double mass = 0.0;
    for (std::size_t j : members) mass += attacker(static_cast<Eigen::Index>(j));
    for (std::size_t j : members) out(static_cast<Eigen::Index>(j)) = mass / static_cast<double>(members.size());
  }
  return out;
}

Equilibrium<double> ReducedGame::Solve() const {
  const Eigen::MatrixXd p = Payoff<double>();
  const ZeroSumSolution<double> sol = SolveZeroSum(p);
  Equilibrium<double> eq{sol.row_strategy, sol.col_strategy, sol.value, 0.0};
  eq.gap = (p * eq.attacker).maxCoeff() - (eq.defender.transpose() * p).minCoeff();
  return eq;
}

bool ReductionReport::ok(double tol) const {
  return std::abs(full_value - reduced_value) <= tol && roundtrip_exact && lifted_gap <= tol &&
         lifted_level >= reduced_level - tol;
}

ReductionReport CheckReduction(const Game& game) {
  const ReducedGame reduced(game);
  const Equilibrium<double> full = Solve<double>(game);
  const Equilibrium<double> hat = reduced.Solve();

  ReductionReport r;
  r.full_value = full.value;
  r.reduced_value = hat.value;
  r.num_classes = reduced.num_classes();

  VectorX<Rational> exact(hat.defender.size());
  for (Eigen::Index i = 0; i < hat.defender.size(); ++i) exact(i) = Rational(hat.defender(i));
  r.roundtrip_exact = reduced.ToReduced<Rational>(reduced.FromReduced<Rational>(exact)) == exact;

  const Eigen::VectorXd lifted_defender = reduced.FromReduced<double>(hat.defender);
  const Eigen::VectorXd lifted_attacker = reduced.SymmetrizeAttacker(hat.attacker);
  r.lifted_level = game.SafetyLevel(lifted_defender);
  r.lifted_gap = game.DefenderBestResponse(lifted_attacker) - r.lifted_level;
  r.reduced_level = (hat.defender.transpose() * reduced.Payoff<double>()).minCoeff();
  return r;
}

}  // namespace peershield
