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

#include <numeric>

#include <doctest.h>

#include "oracles.h"
#include "peershield/game.h"
#include "peershield/random.h"

using namespace peershield;

namespace {

std::vector<PeerAddr> Addrs(std::initializer_list<uint32_t> ips) {
  std::vector<PeerAddr> v;
  for (uint32_t ip : ips) v.push_back(PeerAddr{ip});
  return v;
}

GameSpec Spec(std::vector<PeerAddr> universe, int h, double w, CostModel cost = CostModel::Constant(1.0)) {
  GameSpec s;
  s.universe = std::move(universe);
  s.connections = h;
  s.w_att = w;
  s.cost = cost;
  return s;
}

oracle::SetCost OracleCost(const CostModel& c) {
  if (const auto* m = std::get_if<MaskCost>(&c.variant())) return {m->c_new, m->c_node, m->prefix_len};
  return {0.0, std::get<ConstantCost>(c.variant()).per_node, -1};
}

std::vector<uint32_t> Ips(const GameSpec& s) {
  std::vector<uint32_t> v;
  for (PeerAddr a : s.universe) v.push_back(a.ip);
  return v;
}

std::vector<std::pair<uint32_t, double>> Atoms(const std::vector<NodeSet>& sets, const Eigen::VectorXd& p) {
  std::vector<std::pair<uint32_t, double>> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (p(static_cast<Eigen::Index>(i)) != 0.0) out.emplace_back(sets[i], p(static_cast<Eigen::Index>(i)));
  }
  return out;
}

// Gap of the solver's pair measured by brute force outside the library.
double OracleGap(const Game& g, const Equilibrium<double>& eq, double* lo = nullptr, double* hi = nullptr) {
  return oracle::BestResponseGap(OracleCost(g.spec().cost), g.spec().w_att, Ips(g.spec()),
                                 g.spec().connections, Atoms(g.strategies().defender, eq.defender),
                                 Atoms(g.strategies().attacker, eq.attacker), lo, hi);
}

GameSpec RandomSpec(Rng& rng, bool mask_cost) {
  const int n = 2 + static_cast<int>(rng.Uniform(6));
  std::set<uint32_t> ips;
  while (static_cast<int>(ips.size()) < n) {
    ips.insert(static_cast<uint32_t>((10 + rng.Uniform(3)) << 16 | (1 + rng.Uniform(20))));
  }
  std::vector<PeerAddr> universe;
  for (uint32_t ip : ips) universe.push_back(PeerAddr{ip});
  const int h = 1 + static_cast<int>(rng.Uniform(std::min(n, 2)));
  const double w = 0.5 + 30.0 * rng.Uniform01();
  CostModel cost = mask_cost ? CostModel::Mask(1.0 + static_cast<double>(rng.Uniform(10)), 1.0)
                             : CostModel::Constant(0.5 + rng.Uniform01());
  return Spec(universe, h, w, cost);
}

const std::vector<PeerAddr> kTwo = Addrs({0x0a010001, 0x0a020001});

}  // namespace

TEST_CASE("pure utility") {
  const Game g(Spec(kTwo, 1, 3.0));
  const auto v1 = Addrs({0x0a010001});
  const auto v2 = Addrs({0x0a020001});
  CHECK(Utility(g, v1, {}) == 0.0);
  CHECK(Utility(g, v1, v1) == -2.0);
  CHECK(Utility(g, v1, v2) == 1.0);
  CHECK_THROWS_AS(Utility(g, kTwo, v1), InputError);
  CHECK_THROWS_AS(Utility(g, Addrs({0x0b000001}), v1), InputError);
}

TEST_CASE("mixed utility") {
  const Game g(Spec(kTwo, 1, 3.0));
  const auto& s = g.strategies();
  Eigen::VectorXd d = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(s.defender.size()), 0.5);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.attacker.size()));
  const auto full = std::find(s.attacker.begin(), s.attacker.end(), g.full_set()) - s.attacker.begin();
  a(full) = 1.0;
  CHECK(MixedUtility<double>(g, d, a) == doctest::Approx(-1.0).epsilon(1e-12));

  a.setZero();
  a(0) = 1.0;  // empty set
  CHECK(s.attacker[0] == 0u);
  CHECK(MixedUtility<double>(g, d, a) == 0.0);

  // Point masses agree with the pure utility.
  const Game unpruned(Spec(kTwo, 1, 3.0), AttackerSpaceOptions{.prune_dominated = false});
  const auto& u = unpruned.strategies();
  for (std::size_t i = 0; i < u.defender.size(); ++i) {
    for (std::size_t j = 0; j < u.attacker.size(); ++j) {
      Eigen::VectorXd pd = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(u.defender.size()));
      Eigen::VectorXd pa = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(u.attacker.size()));
      pd(static_cast<Eigen::Index>(i)) = 1;
      pa(static_cast<Eigen::Index>(j)) = 1;
      CHECK(MixedUtility<double>(unpruned, pd, pa) == unpruned.Utility(u.defender[i], u.attacker[j]));
    }
  }
  CHECK_THROWS_AS(MixedUtility<double>(g, Eigen::VectorXd::Ones(5), a), InputError);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(Game(Spec(kTwo, 0, 1.0)), InputError);
  CHECK_THROWS_AS(Game(Spec(kTwo, 3, 1.0)), InputError);
  CHECK_THROWS_AS(Game(Spec(kTwo, 1, -1.0)), InputError);
  CHECK_THROWS_AS(Game(Spec(Addrs({1, 1}), 1, 1.0)), InputError);
  std::vector<PeerAddr> big;
  for (uint32_t i = 1; i <= 15; ++i) big.push_back(PeerAddr{i});
  CHECK_THROWS_AS(Game(Spec(big, 1, 1.0)), SizeGuardError);
}

TEST_CASE("two-node values against the exact two-row oracle") {
  for (double w : {3.0, 1.5, 0.0, 2.0, 2.5, 7.0}) {
    CAPTURE(w);
    const Game g(Spec(kTwo, 1, w), AttackerSpaceOptions{.prune_dominated = false});
    const auto p = g.Payoff<Rational>();
    std::vector<oracle::Q> r0, r1;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      r0.push_back(p(0, j));
      r1.push_back(p(1, j));
    }
    const double oracle_value = static_cast<double>(oracle::TwoRowValue(r0, r1));
    const auto eq = SolveCertified(g);
    CHECK(eq.value == doctest::Approx(oracle_value).epsilon(1e-9));
    CHECK(Solve<Rational>(g).value == oracle::TwoRowValue(r0, r1));
  }
  CHECK(SolveCertified(Game(Spec(kTwo, 1, 3.0))).value == doctest::Approx(-1.0).epsilon(1e-12));
  const auto quiet = SolveCertified(Game(Spec(kTwo, 1, 1.5)));
  CHECK(std::abs(quiet.value) < 1e-12);
  CHECK(quiet.attacker(0) == doctest::Approx(1.0));
}

TEST_CASE("no damage: attacker abstains") {
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    GameSpec s = RandomSpec(rng, i % 2 == 0);
    s.w_att = 0.0;
    const Game g(s);
    const auto eq = SolveCertified(g);
    CHECK(std::abs(eq.value) < 1e-12);
    CHECK(eq.attacker(0) == doctest::Approx(1.0));
    CHECK(CheckSupportDichotomy(g, eq));
  }
}

TEST_CASE("random instances: certified by brute-force best responses") {
  Rng rng(41);
  for (int i = 0; i < 30; ++i) {
    const GameSpec s = RandomSpec(rng, i % 3 != 0);
    CAPTURE(i);
    const Game g(s);
    const auto eq = SolveCertified(g);
    double lo = 0, hi = 0;
    CHECK(OracleGap(g, eq, &lo, &hi) <= 1e-6);
    CHECK(eq.value == doctest::Approx(lo).epsilon(1e-9));
    CHECK(IsDistribution(eq.defender));
    CHECK(IsDistribution(eq.attacker));
    // Pruned and unpruned attacker spaces give the same value.
    const Game full(s, AttackerSpaceOptions{.prune_dominated = false});
    CHECK(Solve<double>(full).value == doctest::Approx(eq.value).epsilon(1e-9));
  }
}

TEST_CASE("exact and floating solves agree") {
  Rng rng(5);
  for (int i = 0; i < 8; ++i) {
    GameSpec s = RandomSpec(rng, true);
    s.w_att = std::round(s.w_att);
    const Game g(s);
    const auto exact = Solve<Rational>(g);
    CHECK(exact.gap <= 1e-12);
    CHECK(SolveCertified(g).value == doctest::Approx(static_cast<double>(exact.value)).epsilon(1e-9));
    CHECK(exact.defender.sum() == 1);
    CHECK(exact.attacker.sum() == 1);
  }
}

TEST_CASE("equilibrium structure") {
  Rng rng(77);
  for (int i = 0; i < 12; ++i) {
    const GameSpec s = RandomSpec(rng, i % 2 == 0);
    CAPTURE(i);
    const Game g(s);
    const auto eq = SolveCertified(g);
    CHECK(CheckSupportDichotomy(g, eq));
    CHECK(CheckCostCoverageOrder(g, eq));
    const double level = g.SafetyLevel(eq.defender);
    CHECK(CheckSafetyUnderSmallerDamage(s, s.w_att, s.w_att, eq.defender, level));
    CHECK(CheckSafetyUnderSmallerDamage(s, s.w_att, 0.0, eq.defender, level));
    for (int k = 0; k < 3; ++k) {
      CHECK(CheckSafetyUnderSmallerDamage(s, s.w_att, s.w_att * rng.Uniform01(), eq.defender, level));
    }
  }
  // Damage above the price of everything: the attacker plays and covers.
  const GameSpec rich = Spec(Addrs({0x0a010001, 0x0a010002, 0x0a020001}), 2, 100.0);
  const Game g(rich);
  const auto eq = SolveCertified(g);
  CHECK(eq.attacker(0) < 1.0 - 1e-9);
  CHECK(CheckSupportDichotomy(g, eq));
  CHECK_THROWS_AS(CheckSafetyUnderSmallerDamage(rich, 1.0, 2.0, eq.defender, 0.0), InputError);
}

TEST_CASE("symmetric constant-cost instance: equal sizes carry equal coverage") {
  const Game g(Spec(Addrs({1, 2, 3, 4}), 2, 9.0));
  const auto eq = Solve<Rational>(g);
  const Eigen::VectorXd d = eq.defender.unaryExpr([](const Rational& r) { return static_cast<double>(r); });
  const Eigen::VectorXd a = eq.attacker.unaryExpr([](const Rational& r) { return static_cast<double>(r); });
  std::map<int, double> coverage;
  for (std::size_t j = 0; j < g.strategies().attacker.size(); ++j) {
    if (a(static_cast<Eigen::Index>(j)) <= 0) continue;
    const NodeSet b = g.strategies().attacker[j];
    const double c = g.Coverage(d, b);
    auto [it, fresh] = coverage.emplace(SetSize(b), c);
    if (!fresh) CHECK(it->second == doctest::Approx(c));
  }
  Equilibrium<double> deq{d, a, static_cast<double>(eq.value), eq.gap};
  CHECK(CheckCostCoverageOrder(g, deq));
}

TEST_CASE("relabeling the universe leaves the value unchanged") {
  Rng rng(12);
  for (int i = 0; i < 8; ++i) {
    GameSpec s = RandomSpec(rng, true);
    const double v = SolveCertified(Game(s)).value;
    for (std::size_t k = s.universe.size(); k > 1; --k) std::swap(s.universe[k - 1], s.universe[rng.Uniform(k)]);
    CHECK(SolveCertified(Game(s)).value == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("scaling damage and costs scales the value") {
  Rng rng(13);
  for (int i = 0; i < 6; ++i) {
    GameSpec s = RandomSpec(rng, true);
    const auto& m = std::get<MaskCost>(s.cost.variant());
    const double v = SolveCertified(Game(s)).value;
    for (double lambda : {0.5, 3.0}) {
      GameSpec t = s;
      t.w_att *= lambda;
      t.cost = CostModel::Mask(m.c_new * lambda, m.c_node * lambda);
      CHECK(SolveCertified(Game(t)).value == doctest::Approx(lambda * v).epsilon(1e-9));
    }
  }
  // Exact solver: supports coincide under integer scaling.
  const GameSpec s = Spec(Addrs({0x0a010001, 0x0a010002, 0x0a020001}), 1, 7.0, CostModel::Mask(2.0, 1.0));
  GameSpec t = s;
  t.w_att = 21.0;
  t.cost = CostModel::Mask(6.0, 3.0);
  const auto a = Solve<Rational>(Game(s));
  const auto b = Solve<Rational>(Game(t));
  CHECK(b.value == 3 * a.value);
  for (Eigen::Index i = 0; i < a.attacker.size(); ++i) CHECK((a.attacker(i) == 0) == (b.attacker(i) == 0));
}

TEST_CASE("reduction classes") {
  // Two nodes share a mask, one apart, H = 1.
  const Game g1(Spec(Addrs({0x0a010001, 0x0a010002, 0x0a020001}), 1, 5.0, CostModel::Mask(10, 1)));
  const ReducedGame r1(g1);
  REQUIRE(r1.num_classes() == 2);
  std::multiset<std::size_t> sizes1;
  for (const auto& c : r1.classes()) sizes1.insert(c.size());
  CHECK(sizes1 == std::multiset<std::size_t>{1, 2});

  // Constant cost: one class.
  const Game g2(Spec(Addrs({1, 2, 3, 4, 5}), 2, 5.0));
  CHECK(ReducedGame(g2).num_classes() == 1);

  // Two masks of two nodes, H = 2: both-in-first, both-in-second, one each.
  const Game g3(Spec(Addrs({0x0a010001, 0x0a010002, 0x0a020001, 0x0a020002}), 2, 30.0, CostModel::Mask(10, 1)));
  const ReducedGame r3(g3);
  REQUIRE(r3.num_classes() == 3);
  std::multiset<std::size_t> sizes3;
  for (const auto& c : r3.classes()) sizes3.insert(c.size());
  CHECK(sizes3 == std::multiset<std::size_t>{1, 1, 4});

  // Every class member pays the class average against symmetrized attackers,
  // and members of a class share the signature.
  for (const Game* g : {&g1, &g2, &g3}) {
    const ReducedGame r(*g);
    std::vector<std::size_t> seen;
    for (const auto& c : r.classes()) {
      for (std::size_t i : c) {
        seen.push_back(i);
        CHECK(g->Signature(g->strategies().defender[i]) == g->Signature(g->strategies().defender[c[0]]));
      }
    }
    std::sort(seen.begin(), seen.end());
    std::vector<std::size_t> all(g->strategies().defender.size());
    std::iota(all.begin(), all.end(), 0);
    CHECK(seen == all);

    Rng rng(8);
    Eigen::VectorXd att(static_cast<Eigen::Index>(g->strategies().attacker.size()));
    for (Eigen::Index j = 0; j < att.size(); ++j) att(j) = rng.Uniform01();
    att /= att.sum();
    const Eigen::VectorXd sym = r.SymmetrizeAttacker(att);
    CHECK(sym.sum() == doctest::Approx(1.0));
    const Eigen::VectorXd pay = g->Payoff<double>() * sym;
    for (const auto& c : r.classes()) {
      for (std::size_t i : c) CHECK(pay(static_cast<Eigen::Index>(i)) == doctest::Approx(pay(static_cast<Eigen::Index>(c[0]))));
    }
  }
}

TEST_CASE("reduced game keeps the value") {
  std::vector<GameSpec> specs{
      Spec(Addrs({0x0a010001, 0x0a010002, 0x0a020001}), 1, 5.0, CostModel::Mask(10, 1)),
      Spec(Addrs({0x0a010001, 0x0a010002, 0x0a020001}), 1, 40.0, CostModel::Mask(10, 1)),
      Spec(Addrs({1, 2, 3, 4, 5}), 2, 8.0),
      Spec(Addrs({0x0a010001, 0x0a010002, 0x0a020001, 0x0a020002}), 2, 30.0, CostModel::Mask(10, 1)),
      Spec(Addrs({0x0a010001}), 1, 5.0),
      Spec(Addrs({0x0a010001}), 1, 0.5),
  };
  Rng rng(99);
  for (int i = 0; i < 6; ++i) specs.push_back(RandomSpec(rng, true));
  for (const auto& s : specs) {
    const Game g(s);
    const ReductionReport rep = CheckReduction(g);
    CHECK(rep.ok());
    CHECK(rep.roundtrip_exact);
    CHECK(rep.full_value == doctest::Approx(rep.reduced_value).epsilon(1e-9));
    CHECK(rep.lifted_gap <= 1e-6);
    CHECK(rep.lifted_level >= rep.reduced_level - 1e-6);
  }
  // One node: attacker either skips or buys it.
  CHECK(CheckReduction(Game(Spec(Addrs({7}), 1, 5.0))).full_value == doctest::Approx(-4.0));
  CHECK(std::abs(CheckReduction(Game(Spec(Addrs({7}), 1, 0.5))).full_value) < 1e-12);
}
