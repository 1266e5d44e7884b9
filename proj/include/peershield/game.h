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

// The defender/attacker isolation game on a small universe of peers.
//
// The defender picks H peers to connect to; the attacker buys any subset of
// the universe. The defender's payoff is the attacker's spend C(B), minus
// W_att when every chosen peer was bought. Pure strategies are bitmasks over
// universe indices, so universes are capped at kMaxUniverse peers.

#ifndef PEERSHIELD_GAME_H_
#define PEERSHIELD_GAME_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "peershield/addr.h"
#include "peershield/cost.h"
#include "peershield/errors.h"
#include "peershield/lp.h"

namespace peershield {

using NodeSet = uint32_t;

inline bool IsSubset(NodeSet a, NodeSet b) { return (a & ~b) == 0; }
inline int SetSize(NodeSet s) { return std::popcount(s); }

struct GameSpec {
  std::vector<PeerAddr> universe;
  int connections = 1;  // H
  double w_att = 0.0;
  CostModel cost = CostModel::Constant(1.0);

  // Distinct universe, 1 <= H <= |V|, W_att >= 0.
  void Validate() const;
};

struct AttackerSpaceOptions {
  // Drops attacker sets that are strictly dominated by the empty set: sets
  // with fewer than H nodes (they cover nothing) and sets costing more than
  // W_att (they pay more than any win returns).
  bool prune_dominated = true;
  std::optional<double> cost_cap;
};

// Defender sets (all H-subsets, colexicographic) and attacker sets (empty
// set first, then ascending bitmask).
struct PureStrategies {
  std::vector<NodeSet> defender;
  std::vector<NodeSet> attacker;
};

template <typename Scalar>
struct Equilibrium {
  VectorX<Scalar> defender;  // over PureStrategies::defender
  VectorX<Scalar> attacker;  // over PureStrategies::attacker
  Scalar value;
  // max_A U(A, attacker) - min_{B subset V} U(defender, B), evaluated over the
  // unpruned attacker space. Zero for an exact equilibrium.
  double gap = 0.0;
};

class Game {
 public:
  static constexpr int kMaxUniverse = 14;
  static constexpr std::size_t kMaxTableauCells = 40'000'000;

  explicit Game(GameSpec spec, AttackerSpaceOptions opts = {});

  const GameSpec& spec() const { return spec_; }
  const PureStrategies& strategies() const { return strategies_; }
  int universe_size() const { return static_cast<int>(spec_.universe.size()); }
  NodeSet full_set() const { return universe_size() == 32 ? ~NodeSet{0} : (NodeSet{1} << universe_size()) - 1; }
  // Equivalence group of each universe index (mask index, or 0 for every
  // node under constant cost).
  const std::vector<int>& groups() const { return group_; }
  int num_groups() const { return num_groups_; }

  double Cost(NodeSet b) const;
  double Utility(NodeSet a, NodeSet b) const {
    return Cost(b) - (IsSubset(a, b) ? spec_.w_att : 0.0);
  }
  NodeSet ToSet(std::span<const PeerAddr> addrs) const;
  std::vector<PeerAddr> ToAddrs(NodeSet s) const;
  // Per-group node counts of s; the key for strategic equivalence.
  std::vector<int> Signature(NodeSet s) const;

  // Rows: defender sets. Columns: attacker sets.
  template <typename Scalar>
  MatrixX<Scalar> Payoff() const {
    const auto& d = strategies_.defender;
    const auto& a = strategies_.attacker;
    MatrixX<Scalar> p(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(a.size()));
    for (std::size_t j = 0; j < a.size(); ++j) {
      const Scalar cost = Scalar(Cost(a[j]));
      const Scalar lost = cost - Scalar(spec_.w_att);
      for (std::size_t i = 0; i < d.size(); ++i) {
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            IsSubset(d[i], a[j]) ? lost : cost;
      }
    }
    return p;
  }

  // sum over defender sets A inside b of sigma_A.
  double Coverage(const Eigen::VectorXd& defender, NodeSet b) const;
  // min over every B subset of V (not only the listed attacker sets).
  double SafetyLevel(const Eigen::VectorXd& defender) const;
  // max over defender sets of U(A, attacker).
  double DefenderBestResponse(const Eigen::VectorXd& attacker) const;

 private:
  GameSpec spec_;
  PureStrategies strategies_;
  std::vector<int> group_;
  int num_groups_ = 0;
};

// U(A, B) on address sets. Throws InputError unless |A| = H and A, B are in
// the universe.
double Utility(const Game& game, std::span<const PeerAddr> a, std::span<const PeerAddr> b);

// sigma1' P sigma2. Throws InputError on dimension mismatch.
template <typename Scalar>
Scalar MixedUtility(const Game& game, const VectorX<Scalar>& defender,
                    const VectorX<Scalar>& attacker) {
  const auto& s = game.strategies();
  if (defender.size() != static_cast<Eigen::Index>(s.defender.size()) ||
      attacker.size() != static_cast<Eigen::Index>(s.attacker.size())) {
    throw InputError("mixed strategy dimension does not match the game");
  }
  return defender.dot(game.Payoff<Scalar>() * attacker);
}

// Nonnegative entries summing to one within `tol`.
bool IsDistribution(const Eigen::VectorXd& p, double tol = 1e-9);

// Minimax-optimal strategies. Throws SizeGuardError when the game is too
// large to materialize.
template <typename Scalar>
Equilibrium<Scalar> Solve(const Game& game);

extern template Equilibrium<double> Solve<double>(const Game&);
extern template Equilibrium<Rational> Solve<Rational>(const Game&);

// Solve, then verify the best-response gap against the full attacker space.
// Throws std::runtime_error when the gap exceeds `max_gap`.
Equilibrium<double> SolveCertified(const Game& game, double max_gap = 1e-6);

// ---- Equilibrium structure checks -----------------------------------------

// Safety levels do not degrade when the damage shrinks: for W2 <= W1 and
// every attacker set B, U_W2(sigma1, B) >= U_W1(sigma1, B), and the W2 safety
// level is >= `level` (the W1 level of sigma1) within tol.
bool CheckSafetyUnderSmallerDamage(const GameSpec& spec, double w1, double w2,
                                   const Eigen::VectorXd& defender, double level,
                                   double tol = 1e-6);

// The attacker either abstains (all mass on the empty set) or every defender
// set is contained in some supported attacker set.
bool CheckSupportDichotomy(const Game& game, const Equilibrium<double>& eq, double tol = 1e-6);

// For supported B1, B2: C(B1) <= C(B2) iff coverage(B1) <= coverage(B2), and
// equal costs carry equal coverage, all within tol.
bool CheckCostCoverageOrder(const Game& game, const Equilibrium<double>& eq, double tol = 1e-6);

// ---- Equivalence-class reduction ------------------------------------------

// Defender sets grouped by per-group node counts: sets reachable from one
// another by swapping nodes inside a mask. Payoff of a class is the average
// over its members.
class ReducedGame {
 public:
  explicit ReducedGame(const Game& game);

  const Game& game() const { return *game_; }
  const std::vector<std::vector<std::size_t>>& classes() const { return classes_; }
  const std::vector<std::size_t>& class_of() const { return class_of_; }
  std::size_t num_classes() const { return classes_.size(); }

  template <typename Scalar>
  MatrixX<Scalar> Payoff() const {
    const MatrixX<Scalar> full = game_->Payoff<Scalar>();
    MatrixX<Scalar> p(static_cast<Eigen::Index>(classes_.size()), full.cols());
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      VectorX<Scalar> sum = VectorX<Scalar>::Zero(full.cols());
      for (std::size_t i : classes_[c]) sum += full.row(static_cast<Eigen::Index>(i)).transpose();
      p.row(static_cast<Eigen::Index>(c)) = sum.transpose() / Scalar(classes_[c].size());
    }
    return p;
  }

  // T: class mass is the sum of member masses.
  template <typename Scalar>
  VectorX<Scalar> ToReduced(const VectorX<Scalar>& defender) const {
    VectorX<Scalar> out = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(classes_.size()));
    for (std::size_t i = 0; i < class_of_.size(); ++i) {
      out(static_cast<Eigen::Index>(class_of_[i])) += defender(static_cast<Eigen::Index>(i));
    }
    return out;
  }

  // T^-1: class mass spread uniformly over its members.
  template <typename Scalar>
  VectorX<Scalar> FromReduced(const VectorX<Scalar>& reduced) const {
    VectorX<Scalar> out(static_cast<Eigen::Index>(class_of_.size()));
    for (std::size_t i = 0; i < class_of_.size(); ++i) {
      const std::size_t c = class_of_[i];
      out(static_cast<Eigen::Index>(i)) =
          reduced(static_cast<Eigen::Index>(c)) / Scalar(classes_[c].size());
    }
    return out;
  }

  // Spreads each attacker set's mass uniformly over the sets with the same
  // per-group counts. The result pays the same against every member of a
  // defender class.
  Eigen::VectorXd SymmetrizeAttacker(const Eigen::VectorXd& attacker) const;

  Equilibrium<double> Solve() const;

 private:
  const Game* game_;
  std::vector<std::vector<std::size_t>> classes_;
  std::vector<std::size_t> class_of_;
};

struct ReductionReport {
  double full_value = 0.0;
  double reduced_value = 0.0;
  bool roundtrip_exact = false;   // T(T^-1(sigma_hat)) == sigma_hat in exact arithmetic
  double lifted_gap = 0.0;        // best-response gap of the lifted pair in the full game
  double reduced_level = 0.0;     // safety level of sigma_hat in the reduced game
  double lifted_level = 0.0;      // safety level of T^-1(sigma_hat) in the full game
  std::size_t num_classes = 0;

  bool ok(double tol = 1e-6) const;
};

// Solves the full and reduced games and compares them.
ReductionReport CheckReduction(const Game& game);

}  // namespace peershield

#endif  // PEERSHIELD_GAME_H_
