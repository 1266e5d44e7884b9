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

// JSON configuration blocks and report files.
//
// Readers throw InputError on malformed or out-of-range values. Unknown keys
// are ignored.

#ifndef PEERSHIELD_IO_H_
#define PEERSHIELD_IO_H_

#include <filesystem>
#include <string>

#include <json.hpp>

#include "peershield/addr.h"
#include "peershield/cost.h"
#include "peershield/game.h"
#include "peershield/safety.h"
#include "peershield/sim.h"

namespace peershield {

using Json = nlohmann::ordered_json;

Json ReadJsonFile(const std::filesystem::path& path);
// Pretty-printed, trailing newline.
void WriteJsonFile(const std::filesystem::path& path, const Json& j);

// {"variant": "mask", "c_new": 10.0, "c_node": 1.0, "prefix_len": 16} or
// {"variant": "constant", "c": 1.0}. Missing fields take the defaults.
CostModel CostModelFromJson(const Json& j);
MaskCost MaskCostFromJson(const Json& j);
Json ToJson(const CostModel& cost);
Json ToJson(const MaskCost& cost);

// {"universe": ["10.1.0.1", ...], "H": 1, "W_att": 3.0, "cost": {...}}
GameSpec GameSpecFromJson(const Json& j);
Json ToJson(const GameSpec& spec);

// Support atoms with probability above `threshold`, as address lists.
Json EquilibriumToJson(const Game& game, const Equilibrium<double>& eq, double threshold = 1e-12);

// {"H": 8, "weights": {"1": 0.5, "2": 0.5}}; absent weights mean uniform
// over masks.
RestrictedDefender DefenderFromJson(const Json& j, const MaskCensus& census);
Json ToJson(const RestrictedDefender& def);

// Snapshot file, or a `mask,count` CSV as written by WriteCountsCsv.
MaskCensus LoadCensus(const std::filesystem::path& path, int prefix_len);

// Scenario file:
//   {"census": {"masks": {"8": 50}} | {"snapshot": "path", "prefix_len": 16},
//    "cost": {...}, "W_att": 1e30, "budgets": [...], "retransmission_factor": 100,
//    "H": 8, "trials": 1000, "seed": 1, "bloom_fpr": 0.001,
//    "policies": {"naive": {"capacity": 20480}, "naive_filter": {...},
//                 "bucketed": {"bucket_size": 8, "prefix_len": 16, "weights": {...}}}}
// Relative snapshot paths resolve against `base_dir`.
struct ScenarioFile {
  AttackScenario scenario;
  std::vector<DefenderPolicy> policies;
};
ScenarioFile ScenarioFromJson(const Json& j, const std::filesystem::path& base_dir);
Json ToJson(const AttackScenario& s);
Json ToJson(const DefenderPolicy& p);
Json ToJson(const DominanceSummary& s);
Json ToJson(const AttackOutcomeCurve& c);

}  // namespace peershield

#endif  // PEERSHIELD_IO_H_
