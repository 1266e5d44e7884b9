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

#include "peershield/io.h"

#include <fstream>
#include <sstream>

#include "peershield/errors.h"

namespace peershield {
namespace {

template <typename T>
T Get(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

std::size_t ParseSize(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || v == 0) {
    throw InputError(std::string(what) + " key '" + s + "' is not a positive integer");
  }
  return static_cast<std::size_t>(v);
}

std::map<std::size_t, double> WeightsFromJson(const Json& j) {
  std::map<std::size_t, double> out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw InputError("weights must be an object keyed by mask size");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw InputError("weight for mask size " + k + " is not a number");
    out[ParseSize(k, "weights")] = v.get<double>();
  }
  return out;
}

Json WeightsToJson(const std::map<std::size_t, double>& w) {
  Json j = Json::object();
  for (const auto& [size, p] : w) j[std::to_string(size)] = p;
  return j;
}

PeerAddr AddrOrThrow(const std::string& s) {
  auto a = ParseAddr(s);
  if (!a) throw InputError("malformed address '" + s + "'");
  return *a;
}

}  // namespace

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

MaskCost MaskCostFromJson(const Json& j) {
  MaskCost c;
  c.c_new = Get(j, "c_new", c.c_new);
  c.c_node = Get(j, "c_node", c.c_node);
  c.prefix_len = Get(j, "prefix_len", c.prefix_len);
  CostModel{c};  // validates
  return c;
}

CostModel CostModelFromJson(const Json& j) {
  if (!j.is_object()) throw InputError("cost block must be an object");
  const std::string variant = Get<std::string>(j, "variant", "mask");
  if (variant == "mask") return CostModel(MaskCostFromJson(j));
  if (variant == "constant") return CostModel::Constant(Get(j, "c", 1.0));
  throw InputError("unknown cost variant '" + variant + "'");
}

Json ToJson(const MaskCost& c) {
  return Json{{"variant", "mask"}, {"c_new", c.c_new}, {"c_node", c.c_node}, {"prefix_len", c.prefix_len}};
}

Json ToJson(const CostModel& cost) {
  if (const auto* m = std::get_if<MaskCost>(&cost.variant())) return ToJson(*m);
  return Json{{"variant", "constant"}, {"c", std::get<ConstantCost>(cost.variant()).per_node}};
}

GameSpec GameSpecFromJson(const Json& j) {
  if (!j.is_object()) throw InputError("game spec must be an object");
  if (!j.contains("universe") || !j.at("universe").is_array()) throw InputError("game spec needs a universe array");
  GameSpec spec;
  for (const auto& a : j.at("universe")) {
    if (!a.is_string()) throw InputError("universe entries must be dotted-quad strings");
    spec.universe.push_back(AddrOrThrow(a.get<std::string>()));
  }
  spec.connections = Get(j, "H", 1);
  spec.w_att = Get(j, "W_att", 0.0);
  if (j.contains("cost")) spec.cost = CostModelFromJson(j.at("cost"));
  spec.Validate();
  return spec;
}

Json ToJson(const GameSpec& spec) {
  Json u = Json::array();
  for (PeerAddr a : spec.universe) u.push_back(ToString(a));
  return Json{{"universe", u}, {"H", spec.connections}, {"W_att", spec.w_att}, {"cost", ToJson(spec.cost)}};
}

Json EquilibriumToJson(const Game& game, const Equilibrium<double>& eq, double threshold) {
  auto atoms = [&](const std::vector<NodeSet>& sets, const Eigen::VectorXd& p) {
    Json out = Json::array();
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const double w = p(static_cast<Eigen::Index>(i));
      if (w <= threshold) continue;
      Json addrs = Json::array();
      for (PeerAddr a : game.ToAddrs(sets[i])) addrs.push_back(ToString(a));
      out.push_back(Json{{"set", addrs}, {"probability", w}});
    }
    return out;
  };
  return Json{{"value", eq.value},
              {"gap", eq.gap},
              {"defender", atoms(game.strategies().defender, eq.defender)},
              {"attacker", atoms(game.strategies().attacker, eq.attacker)}};
}

RestrictedDefender DefenderFromJson(const Json& j, const MaskCensus& census) {
  const int h = Get(j, "H", 8);
  RestrictedDefender def;
  if (j.is_object() && j.contains("weights") && !j.at("weights").is_null()) {
    def.weights = WeightsFromJson(j.at("weights"));
    def.connections = h;
  } else {
    def = RestrictedDefender::UniformOverMasks(census, h);
  }
  def.Validate(census);
  return def;
}

Json ToJson(const RestrictedDefender& def) {
  return Json{{"H", def.connections}, {"weights", WeightsToJson(def.weights)}};
}

MaskCensus LoadCensus(const std::filesystem::path& path, int prefix_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string first;
  std::streampos start = in.tellg();
  while (std::getline(in, first)) {
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (!first.empty() && first[0] != '#') break;
  }
  if (first != "mask,count") {
    in.clear();
    in.seekg(start);
    const auto addrs = ParseSnapshot(in);
    return Census(addrs, prefix_len);
  }
  std::map<MaskId, std::size_t> counts;
  int len = -1;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    const auto slash = line.find('/');
    if (comma == std::string::npos || slash == std::string::npos || slash > comma) {
      throw ParseError(lineno, "expected <prefix>/<len>,<count>");
    }
    auto addr = ParseAddr(line.substr(0, slash));
    int plen = 0;
    std::size_t count = 0;
    try {
      plen = std::stoi(line.substr(slash + 1, comma - slash - 1));
      count = ParseSize(line.substr(comma + 1), "count");
    } catch (const InputError&) {
      throw ParseError(lineno, "bad count");
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad prefix length");
    }
    if (!addr || plen < 1 || plen > 32) throw ParseError(lineno, "bad mask");
    if (len >= 0 && plen != len) throw ParseError(lineno, "mixed prefix lengths");
    len = plen;
    const MaskId mask = MaskOf(*addr, plen);
    if (mask.prefix != addr->ip) throw ParseError(lineno, "mask has host bits set");
    counts[mask] = count;
  }
  return MaskCensus(std::move(counts), len < 0 ? prefix_len : len);
}

ScenarioFile ScenarioFromJson(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InputError("scenario must be an object");
  ScenarioFile out;
  AttackScenario& s = out.scenario;
  if (!j.contains("census")) throw InputError("scenario needs a census block");
  const Json& c = j.at("census");
  const int prefix_len = Get(c, "prefix_len", kDefaultPrefixLen);
  if (c.contains("snapshot")) {
    std::filesystem::path p = Get<std::string>(c, "snapshot", "");
    if (p.is_relative()) p = base_dir / p;
    s.census = LoadCensus(p, prefix_len);
  } else if (c.contains("masks")) {
    std::map<std::size_t, std::size_t> per_size;
    for (const auto& [k, v] : c.at("masks").items()) {
      if (!v.is_number_unsigned()) throw InputError("mask count for size " + k + " must be a nonnegative integer");
      per_size[ParseSize(k, "masks")] = v.get<std::size_t>();
    }
    s.census = SyntheticCensus(per_size, prefix_len);
  } else {
    throw InputError("census block needs 'masks' or 'snapshot'");
  }
  if (j.contains("cost")) s.cost = MaskCostFromJson(j.at("cost"));
  s.w_att = Get(j, "W_att", s.w_att);
  if (j.contains("budgets")) {
    try {
      s.budgets = j.at("budgets").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("budgets: ") + e.what());
    }
  }
  s.retransmission_factor = Get(j, "retransmission_factor", s.retransmission_factor);
  s.connections = Get(j, "H", s.connections);
  s.trials = Get(j, "trials", s.trials);
  s.seed = Get(j, "seed", s.seed);
  s.bloom_fpr = Get(j, "bloom_fpr", s.bloom_fpr);

  if (j.contains("policies")) {
    for (const auto& [name, p] : j.at("policies").items()) {
      if (name == "naive") {
        out.policies.push_back(NaiveUniformPolicy{Get(p, "capacity", kNaiveCapacity)});
      } else if (name == "naive_filter") {
        out.policies.push_back(NaiveWithFilterPolicy{Get(p, "capacity", kNaiveCapacity)});
      } else if (name == "bucketed") {
        MaskBucketedPolicy b;
        b.prefix_len = Get(p, "prefix_len", b.prefix_len);
        b.bucket_size = Get(p, "bucket_size", b.bucket_size);
        if (p.is_object() && p.contains("weights")) b.weights = WeightsFromJson(p.at("weights"));
        out.policies.push_back(b);
      } else {
        throw InputError("unknown policy '" + name + "'");
      }
    }
  } else {
    out.policies = {NaiveUniformPolicy{}, NaiveWithFilterPolicy{}, MaskBucketedPolicy{}};
  }
  s.Validate();
  return out;
}

Json ToJson(const AttackScenario& s) {
  Json masks = Json::object();
  for (const auto& [size, mass] : s.census.size_histogram()) masks[std::to_string(size)] = mass / size;
  return Json{{"census", {{"masks", masks}, {"prefix_len", s.census.prefix_len()}, {"nodes", s.census.total_nodes()}}},
              {"cost", ToJson(s.cost)},
              {"W_att", s.w_att},
              {"budgets", s.budgets},
              {"retransmission_factor", s.retransmission_factor},
              {"H", s.connections},
              {"trials", s.trials},
              {"seed", s.seed},
              {"bloom_fpr", s.bloom_fpr}};
}

Json ToJson(const DefenderPolicy& p) {
  if (const auto* n = std::get_if<NaiveUniformPolicy>(&p)) return Json{{"capacity", n->capacity}};
  if (const auto* n = std::get_if<NaiveWithFilterPolicy>(&p)) return Json{{"capacity", n->capacity}};
  const auto& b = std::get<MaskBucketedPolicy>(p);
  return Json{{"prefix_len", b.prefix_len}, {"bucket_size", b.bucket_size}, {"weights", WeightsToJson(b.weights)}};
}

Json ToJson(const DominanceSummary& s) {
  Json per = Json::array();
  for (const auto& b : s.per_budget) per.push_back(Json{{"budget", b.budget}, {"ordering", b.ordering}});
  return Json{{"range_low", s.range_low},
              {"range_high", s.range_high},
              {"dominance_holds", s.dominance_holds()},
              {"violations", s.violations},
              {"overwhelmed_budget", s.overwhelmed_budget ? Json(*s.overwhelmed_budget) : Json()},
              {"converges_at_full_coverage", s.converges_at_full_coverage},
              {"per_budget", per}};
}

Json ToJson(const AttackOutcomeCurve& c) {
  Json pts = Json::array();
  for (const auto& p : c.points) {
    Json q{{"budget", p.budget},
           {"spent", p.spent},
           {"attacker_nodes", p.attacker_nodes},
           {"success", p.success},
           {"stderr", p.stderr_}};
    if (p.analytic) q["analytic"] = *p.analytic;
    pts.push_back(q);
  }
  return Json{{"policy", c.policy}, {"points", pts}};
}

}  // namespace peershield
