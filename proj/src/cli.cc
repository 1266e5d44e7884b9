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

#include "peershield/cli.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "peershield/errors.h"
#include "peershield/io.h"
#include "peershield/random.h"

namespace peershield {
namespace {

namespace fs = std::filesystem;

constexpr uint64_t kDefaultSeed = 1;

// Flag value when given, else the config file's value at `path`, else the
// fallback.
template <typename T>
T Resolve(const CLI::Option* flag, const T& flag_value, const Json& config,
          std::initializer_list<const char*> path, T fallback) {
  if (flag && flag->count() > 0) return flag_value;
  const Json* node = &config;
  for (const char* key : path) {
    if (!node->is_object() || !node->contains(key)) return fallback;
    node = &node->at(key);
  }
  if (node->is_null()) return fallback;
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception& e) {
    std::string where;
    for (const char* key : path) where += std::string(where.empty() ? "" : ".") + key;
    throw InputError("config " + where + ": " + e.what());
  }
}

struct Common {
  uint64_t seed_flag = kDefaultSeed;
  std::string out = "out";
  std::string config_path;
  CLI::Option* seed_opt = nullptr;
  Json config = Json::object();

  uint64_t seed() const { return Resolve<uint64_t>(seed_opt, seed_flag, config, {"seed"}, kDefaultSeed); }
};

class Run {
 public:
  Run(const Common& c, std::string command) : dir_(c.out), command_(std::move(command)) {
    fs::create_directories(dir_);
    manifest_["command"] = command_;
    manifest_["seed"] = c.seed();
    manifest_["config_file"] = c.config_path.empty() ? Json() : Json(c.config_path);
  }

  fs::path Path(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }
  Json& manifest() { return manifest_; }

  void Finish() {
    manifest_["outputs"] = outputs_;
    WriteJsonFile(dir_ / "manifest.json", manifest_);
  }

 private:
  fs::path dir_;
  std::string command_;
  Json manifest_;
  std::vector<std::string> outputs_;
};

std::ofstream OpenOut(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write " + p.string());
  return f;
}

// ---- census ----------------------------------------------------------------

struct CensusArgs {
  std::string snapshot;
  int prefix_len = kDefaultPrefixLen;
  CLI::Option* prefix_opt = nullptr;
};

int CmdCensus(const Common& c, const CensusArgs& a, std::ostream& out) {
  const int prefix_len = Resolve(a.prefix_opt, a.prefix_len, c.config, {"census", "prefix_len"},
                                 Resolve<int>(nullptr, 0, c.config, {"cost", "prefix_len"}, kDefaultPrefixLen));
  if (prefix_len < 1 || prefix_len > 32) throw InputError("prefix_len must lie in [1, 32]");

  std::ifstream in(a.snapshot, std::ios::binary);
  if (!in) throw InputError("cannot open " + a.snapshot);
  const std::vector<PeerAddr> addrs = ParseSnapshot(in);
  const MaskCensus census = Census(addrs, prefix_len);

  Run run(c, "census");
  run.manifest()["inputs"] = {{"snapshot", a.snapshot}};
  run.manifest()["config"] = {{"prefix_len", prefix_len}};
  {
    auto f = OpenOut(run.Path("census.csv"));
    WriteHistogramCsv(census, f);
  }
  {
    auto f = OpenOut(run.Path("masks.csv"));
    WriteCountsCsv(census, f);
  }
  run.manifest()["addresses"] = addrs.size();
  run.manifest()["distinct"] = census.total_nodes();
  run.manifest()["masks"] = census.num_masks();
  if (census.empty()) {
    run.Finish();
    throw InputError("census is empty; the inverse mass product is undefined");
  }
  const double log10_product = InverseMassProductLog10(census);
  {
    auto f = OpenOut(run.Path("product.csv"));
    f << "log10_inverse_mass_product\n" << std::setprecision(17) << log10_product << '\n';
  }
  run.manifest()["log10_inverse_mass_product"] = log10_product;
  run.Finish();
  out << "masks " << census.num_masks() << ", nodes " << census.total_nodes() << '\n';
  out << "log10 prod_a 1/M_a = " << std::setprecision(10) << log10_product << '\n';
  return kExitOk;
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
  std::string spec;
  bool exact = false;
  bool no_reduce = false;
  double max_gap = 1e-6;
  CLI::Option* exact_opt = nullptr;
  CLI::Option* no_reduce_opt = nullptr;
  CLI::Option* gap_opt = nullptr;
};

Equilibrium<double> ToDouble(const Equilibrium<Rational>& e) {
  Equilibrium<double> d;
  auto conv = [](const VectorX<Rational>& v) {
    Eigen::VectorXd o(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) o(i) = v(i).convert_to<double>();
    return o;
  };
  d.defender = conv(e.defender);
  d.attacker = conv(e.attacker);
  d.value = e.value.convert_to<double>();
  d.gap = e.gap;
  return d;
}

int CmdSolve(const Common& c, const SolveArgs& a, std::ostream& out) {
  const bool exact = Resolve(a.exact_opt, a.exact, c.config, {"solve", "exact"}, false);
  const bool reduce = !Resolve(a.no_reduce_opt, a.no_reduce, c.config, {"solve", "no_reduce"}, false);
  const double max_gap = Resolve(a.gap_opt, a.max_gap, c.config, {"solve", "max_gap"}, 1e-6);
  const uint64_t seed = c.seed();

  const GameSpec spec = GameSpecFromJson(ReadJsonFile(a.spec));
  const Game game(spec);
  const Equilibrium<double> eq = exact ? ToDouble(Solve<Rational>(game)) : SolveCertified(game, max_gap);

  std::vector<std::pair<std::string, bool>> checks;
  checks.emplace_back("best_response_gap", eq.gap <= max_gap);

  // Three smaller damage values drawn below W_att.
  const double level = game.SafetyLevel(eq.defender);
  Rng rng(DeriveSeed(seed, {0x7e1}));
  bool smaller_ok = true;
  Json smaller = Json::array();
  for (int k = 0; k < 3; ++k) {
    const double w2 = spec.w_att * rng.Uniform01();
    smaller.push_back(w2);
    smaller_ok = smaller_ok && CheckSafetyUnderSmallerDamage(spec, spec.w_att, w2, eq.defender, level);
  }
  checks.emplace_back("safety_under_smaller_damage", smaller_ok);
  checks.emplace_back("support_dichotomy", CheckSupportDichotomy(game, eq));
  checks.emplace_back("cost_coverage_order", CheckCostCoverageOrder(game, eq));

  Json reduction;
  if (reduce) {
    const ReductionReport r = CheckReduction(game);
    checks.emplace_back("reduction_value", r.ok());
    reduction = {{"classes", r.num_classes},
                 {"full_value", r.full_value},
                 {"reduced_value", r.reduced_value},
                 {"roundtrip_exact", r.roundtrip_exact},
                 {"lifted_gap", r.lifted_gap},
                 {"reduced_level", r.reduced_level},
                 {"lifted_level", r.lifted_level}};
  }

  Run run(c, "solve");
  run.manifest()["inputs"] = {{"spec", a.spec}};
  run.manifest()["config"] = {{"game", ToJson(spec)}, {"exact", exact}, {"reduce", reduce}, {"max_gap", max_gap}};
  Json result = EquilibriumToJson(game, eq);
  result["safety_level"] = level;
  if (reduce) result["reduction"] = reduction;
  result["smaller_damage_values"] = smaller;
  WriteJsonFile(run.Path("equilibrium.json"), result);
  {
    auto f = OpenOut(run.Path("checks.csv"));
    f << "check,result\n";
    for (const auto& [name, ok] : checks) f << name << ',' << (ok ? "pass" : "fail") << '\n';
  }
  run.Finish();

  out << "value " << std::setprecision(12) << eq.value << '\n';
  for (const auto& [name, ok] : checks) out << (ok ? "PASS " : "FAIL ") << name << '\n';
  return kExitOk;
}

// ---- safety ----------------------------------------------------------------

struct SafetyArgs {
  std::string census;
  double w_att = 1e6;
  int connections = 8;
  std::vector<double> budgets;
  std::string bound = "conservative";
  double c_new = kDefaultMaskCost.c_new;
  double c_node = kDefaultMaskCost.c_node;
  CLI::Option* w_opt = nullptr;
  CLI::Option* h_opt = nullptr;
  CLI::Option* budgets_opt = nullptr;
  CLI::Option* bound_opt = nullptr;
  CLI::Option* c_new_opt = nullptr;
  CLI::Option* c_node_opt = nullptr;
};

MaskCost ResolveMaskCost(const Common& c, const CLI::Option* c_new_opt, double c_new,
                         const CLI::Option* c_node_opt, double c_node) {
  MaskCost cost = c.config.contains("cost") ? MaskCostFromJson(c.config.at("cost")) : kDefaultMaskCost;
  if (c.config.contains("cost") && c.config.at("cost").value("variant", "mask") != "mask") {
    throw InputError("this command needs a mask cost model");
  }
  if (c_new_opt->count() > 0) cost.c_new = c_new;
  if (c_node_opt->count() > 0) cost.c_node = c_node;
  CostModel{cost};
  return cost;
}

int CmdSafety(const Common& c, const SafetyArgs& a, std::ostream& out) {
  const MaskCost cost = ResolveMaskCost(c, a.c_new_opt, a.c_new, a.c_node_opt, a.c_node);
  const double w_att = Resolve(a.w_opt, a.w_att, c.config, {"safety", "W_att"}, 1e6);
  if (!(w_att >= 0.0)) throw InputError("W_att must be nonnegative");
  const std::string bound = Resolve(a.bound_opt, a.bound, c.config, {"safety", "bound"}, std::string("conservative"));
  if (bound != "conservative" && bound != "literal") throw InputError("bound must be conservative or literal");

  const MaskCensus census = LoadCensus(a.census, cost.prefix_len);
  if (census.empty()) throw InputError("census is empty");
  Json def_json = c.config.contains("safety") ? c.config.at("safety") : Json::object();
  def_json["H"] = Resolve(a.h_opt, a.connections, c.config, {"safety", "H"}, 8);
  const RestrictedDefender def = DefenderFromJson(def_json, census);

  const double full = FullBuyoutCost(census, cost);
  std::vector<double> budgets = Resolve(a.budgets_opt, a.budgets, c.config, {"safety", "budgets"}, std::vector<double>{});
  if (budgets.empty()) {
    for (int k = 0; k <= 10; ++k) budgets.push_back(full * k / 10.0);
  }
  for (double b : budgets) {
    if (!(b >= 0.0)) throw InputError("budgets must be nonnegative");
  }

  Run run(c, "safety");
  run.manifest()["inputs"] = {{"census", a.census}};
  run.manifest()["config"] = {{"cost", ToJson(cost)},
                              {"W_att", w_att},
                              {"defender", ToJson(def)},
                              {"budgets", budgets},
                              {"bound", bound}};
  const BoundVariant variant = bound == "literal" ? BoundVariant::kLiteral : BoundVariant::kConservative;
  Json rows = Json::array();
  {
    auto f = OpenOut(run.Path("safety.csv"));
    WriteSafetyCsvHeader(f);
    for (double b : budgets) {
      const BestResponse br = AttackerBestResponse(def, census, cost, w_att, b);
      SafetyReport r = br.report;
      r.bound = SafetyLowerBound(def, br.allocation, census, cost, w_att, variant);
      WriteSafetyCsvRow(f, b, r);
      Json alloc = Json::object();
      for (const auto& [size, x] : br.allocation) alloc[std::to_string(size)] = x;
      rows.push_back({{"budget", b}, {"allocation", alloc}, {"exhaustive", br.exhaustive}});
    }
  }
  const BestResponse best = AttackerBestResponse(def, census, cost, w_att);
  Json alloc = Json::object();
  for (const auto& [size, x] : best.allocation) alloc[std::to_string(size)] = x;
  WriteJsonFile(run.Path("summary.json"), Json{{"safety_level", best.report.expected_utility},
                                                 {"best_response", alloc},
                                                 {"success_prob", best.report.success_prob},
                                                 {"investment", best.report.investment},
                                                 {"exhaustive", best.exhaustive},
                                                 {"full_buyout_cost", full},
                                                 {"rows", rows}});
  run.Finish();
  out << "safety level " << std::setprecision(12) << best.report.expected_utility << '\n';
  return kExitOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::size_t trials = 0;
  uint64_t retransmission = 0;
  std::vector<double> budgets;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* r_opt = nullptr;
  CLI::Option* budgets_opt = nullptr;
};

int CmdSimulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
  Json j = ReadJsonFile(a.scenario);
  if (c.config.contains("simulate")) j.merge_patch(c.config.at("simulate"));
  if (c.config.contains("cost") && !j.contains("cost")) j["cost"] = c.config.at("cost");
  if (a.trials_opt->count() > 0) j["trials"] = a.trials;
  if (a.r_opt->count() > 0) j["retransmission_factor"] = a.retransmission;
  if (a.budgets_opt->count() > 0) j["budgets"] = a.budgets;
  // Seed: flag, then config file, then the scenario file.
  if (c.seed_opt->count() > 0 || c.config.contains("seed")) j["seed"] = c.seed();
  ScenarioFile sf = ScenarioFromJson(j, fs::path(a.scenario).parent_path());
  Common resolved = c;
  resolved.config["seed"] = sf.scenario.seed;

  const PolicyComparison cmp = ComparePolicies(sf.scenario, sf.policies);

  Run run(resolved, "simulate");
  run.manifest()["inputs"] = {{"scenario", a.scenario}};
  Json policies = Json::object();
  for (const auto& p : sf.policies) policies[PolicyName(p)] = ToJson(p);
  run.manifest()["config"] = {{"scenario", ToJson(sf.scenario)}, {"policies", policies}};
  {
    auto f = OpenOut(run.Path("curves.csv"));
    WriteCurvesCsv(cmp.curves, f);
  }
  Json curves = Json::array();
  for (const auto& cv : cmp.curves) curves.push_back(ToJson(cv));
  WriteJsonFile(run.Path("summary.json"), Json{{"dominance", ToJson(cmp.summary)}, {"curves", curves}});
  run.Finish();

  out << "dominance " << (cmp.summary.dominance_holds() ? "holds" : "violated") << '\n';
  for (const auto& b : cmp.summary.per_budget) out << b.budget << ": " << b.ordering << '\n';
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peer-selection isolation analysis", args.empty() ? "peershield" : args[0]};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  common.seed_opt = app.add_option("--seed", common.seed_flag, "PRNG seed");
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--config", common.config_path, "JSON config file");

  CensusArgs census;
  auto* cmd_census = app.add_subcommand("census", "Mask census of a snapshot");
  cmd_census->add_option("snapshot", census.snapshot, "Snapshot file")->required();
  census.prefix_opt = cmd_census->add_option("--prefix-len", census.prefix_len, "Mask prefix length");

  SolveArgs solve;
  auto* cmd_solve = app.add_subcommand("solve", "Solve a small game and check equilibrium structure");
  cmd_solve->add_option("spec", solve.spec, "Game spec JSON")->required();
  solve.exact_opt = cmd_solve->add_flag("--exact", solve.exact, "Exact rational simplex");
  solve.no_reduce_opt = cmd_solve->add_flag("--no-reduce", solve.no_reduce, "Skip the reduced-game check");
  solve.gap_opt = cmd_solve->add_option("--max-gap", solve.max_gap, "Certificate tolerance");

  SafetyArgs safety;
  auto* cmd_safety = app.add_subcommand("safety", "Restricted-defender safety report");
  cmd_safety->add_option("census", safety.census, "Snapshot or mask,count CSV")->required();
  safety.w_opt = cmd_safety->add_option("--w-att", safety.w_att, "Damage of a successful attack");
  safety.h_opt = cmd_safety->add_option("-H,--connections", safety.connections, "Connections H");
  safety.budgets_opt = cmd_safety->add_option("--budgets", safety.budgets, "Budget grid")->delimiter(',');
  safety.bound_opt = cmd_safety->add_option("--bound", safety.bound, "conservative or literal");
  safety.c_new_opt = cmd_safety->add_option("--c-new", safety.c_new, "Cost per mask");
  safety.c_node_opt = cmd_safety->add_option("--c-node", safety.c_node, "Cost per node");

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Attack success versus investment");
  cmd_sim->add_option("scenario", sim.scenario, "Scenario JSON")->required();
  sim.trials_opt = cmd_sim->add_option("--trials", sim.trials, "Trials per budget");
  sim.r_opt = cmd_sim->add_option("--retransmission", sim.retransmission, "Attacker repeats per address");
  sim.budgets_opt = cmd_sim->add_option("--budgets", sim.budgets, "Budget grid")->delimiter(',');

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (!common.config_path.empty()) common.config = ReadJsonFile(common.config_path);
    if (!common.config.is_object()) throw InputError("config file must hold a JSON object");
    if (cmd_census->parsed()) return CmdCensus(common, census, out);
    if (cmd_solve->parsed()) return CmdSolve(common, solve, out);
    if (cmd_safety->parsed()) return CmdSafety(common, safety, out);
    return CmdSimulate(common, sim, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  }
}

}  // namespace peershield
