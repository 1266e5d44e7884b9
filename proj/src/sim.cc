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

#include "peershield/sim.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "peershield/errors.h"
#include "peershield/safety.h"

namespace peershield {
namespace {

// Census laid out as node ids: mask m owns ids [first[m], first[m] + size[m]),
// and host h of a mask is address prefix + h + 1.
class Universe {
 public:
  explicit Universe(const MaskCensus& census) : prefix_len_(census.prefix_len()) {
    const uint64_t hosts = prefix_len_ >= 32 ? 1 : (uint64_t{1} << (32 - prefix_len_));
    for (const auto& [mask, n] : census.counts()) {
      if (n + 1 > hosts) throw InputError("mask " + ToString(mask) + " cannot hold " + std::to_string(n) + " hosts");
      index_.emplace(mask, masks_.size());
      masks_.push_back(mask);
      first_.push_back(addrs_.size());
      size_.push_back(n);
      for (std::size_t h = 0; h < n; ++h) addrs_.push_back(PeerAddr{mask.prefix + static_cast<uint32_t>(h + 1)});
    }
  }

  std::size_t size() const { return addrs_.size(); }
  PeerAddr addr(std::size_t id) const { return addrs_[id]; }

  // Owned ids are the first `count` hosts of each allocated mask.
  std::vector<uint8_t> Owned(const MaskAllocation& alloc) const {
    std::vector<uint8_t> owned(addrs_.size(), 0);
    for (const auto& [mask, count] : alloc) {
      auto it = index_.find(mask);
      if (it == index_.end()) throw InputError("allocation names mask " + ToString(mask) + " outside the census");
      const std::size_t m = it->second;
      if (count > size_[m]) throw InfeasibleError("allocation exceeds mask " + ToString(mask));
      std::fill_n(owned.begin() + static_cast<std::ptrdiff_t>(first_[m]), count, uint8_t{1});
    }
    return owned;
  }

  std::optional<std::size_t> IdOf(PeerAddr a) const {
    auto it = index_.find(MaskOf(a, prefix_len_));
    if (it == index_.end()) return std::nullopt;
    const uint32_t host = a.ip - it->first.prefix;
    if (host == 0 || host > size_[it->second]) return std::nullopt;
    return first_[it->second] + host - 1;
  }

 private:
  int prefix_len_;
  std::vector<PeerAddr> addrs_;
  std::vector<MaskId> masks_;
  std::vector<std::size_t> first_;
  std::vector<std::size_t> size_;
  std::map<MaskId, std::size_t> index_;
};

template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng.Uniform(i))]);
  }
}

// Honest ids once each and attacker ids `repeats` times (cycling through
// their order), merged so that both streams are spread evenly: honest item i
// sits at (i + 1/2) / h and attacker item j at (j + 1/2) / (a * repeats).
// With `first_only`, attacker repeats are skipped.
template <typename F>
void ForEachAnnouncement(const std::vector<uint32_t>& honest, const std::vector<uint32_t>& attacker,
                         uint64_t repeats, bool first_only, F&& emit) {
  const uint64_t h = honest.size();
  const uint64_t a = attacker.size();
  const uint64_t total_att = a * repeats;
  const uint64_t att_limit = first_only ? a : total_att;
  uint64_t i = 0;
  uint64_t j = 0;
  while (i < h || j < att_limit) {
    const bool take_honest =
        j >= att_limit || (i < h && (2 * i + 1) * total_att <= (2 * j + 1) * h);
    if (take_honest) {
      emit(honest[i++]);
    } else {
      emit(attacker[j++ % a]);
    }
  }
}

class NaiveBuffer {
 public:
  NaiveBuffer(std::size_t capacity, std::size_t universe)
      : capacity_(capacity), pos_(universe, -1) {
    slots_.reserve(capacity);
  }

  void Announce(uint32_t id, Rng& rng) {
    if (pos_[id] >= 0) return;
    if (slots_.size() < capacity_) {
      pos_[id] = static_cast<int32_t>(slots_.size());
      slots_.push_back(id);
      return;
    }
    const auto victim = static_cast<std::size_t>(rng.Uniform(capacity_));
    pos_[slots_[victim]] = -1;
    slots_[victim] = id;
    pos_[id] = static_cast<int32_t>(victim);
  }

  // Up to n distinct records; the buffer is consumed.
  std::vector<uint32_t> TakeDistinct(std::size_t n, Rng& rng) {
    n = std::min(n, slots_.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(slots_[i], slots_[i + static_cast<std::size_t>(rng.Uniform(slots_.size() - i))]);
    }
    return {slots_.begin(), slots_.begin() + static_cast<std::ptrdiff_t>(n)};
  }

 private:
  std::size_t capacity_;
  std::vector<uint32_t> slots_;
  std::vector<int32_t> pos_;
};

// The victim is isolated when it connects to at least one node and every
// node it connects to is corrupted. A buffer holding fewer than H records
// yields connections to all of them.
bool Isolated(const std::vector<uint32_t>& chosen, const std::vector<uint8_t>& owned) {
  return !chosen.empty() &&
         std::all_of(chosen.begin(), chosen.end(), [&](uint32_t id) { return owned[id] != 0; });
}

std::vector<uint32_t> ToIds(const Universe& u, const std::vector<PeerAddr>& addrs) {
  std::vector<uint32_t> ids;
  ids.reserve(addrs.size());
  for (PeerAddr a : addrs) ids.push_back(static_cast<uint32_t>(*u.IdOf(a)));
  return ids;
}

// Per-connection plan: class by weight, then a uniform bucket of the class.
// Entries that would ask a bucket for more records than it holds are drawn
// again.
std::vector<BucketKey> PlanConnections(const PeerBuffer& buf, const MaskBucketedPolicy& policy,
                                       int connections, Rng& rng) {
  std::map<uint64_t, std::vector<BucketKey>> classes;
  std::size_t stored = 0;
  for (const auto& [key, b] : buf.buckets()) {
    if (b.records.empty()) continue;
    classes[b.history].push_back(key);
    stored += b.records.size();
  }
  std::vector<BucketKey> plan;
  if (stored <= static_cast<std::size_t>(connections)) {
    for (const auto& [key, b] : buf.buckets()) plan.insert(plan.end(), b.records.size(), key);
    return plan;
  }

  std::vector<const std::vector<BucketKey>*> members;
  std::vector<double> weight;
  for (const auto& [size, keys] : classes) {
    members.push_back(&keys);
    if (policy.weights.empty()) {
      weight.push_back(static_cast<double>(keys.size()));
    } else {
      auto it = policy.weights.find(size);
      weight.push_back(it == policy.weights.end() ? 0.0 : it->second);
    }
  }
  double total = 0.0;
  for (double w : weight) total += w;
  if (!(total > 0.0)) {
    for (std::size_t c = 0; c < weight.size(); ++c) weight[c] = static_cast<double>(members[c]->size());
    for (double w : weight) total += w;
  }

  std::map<BucketKey, std::size_t> demand;
  while (plan.size() < static_cast<std::size_t>(connections)) {
    double u = rng.Uniform01() * total;
    std::size_t c = 0;
    while (c + 1 < weight.size() && (weight[c] == 0.0 || u >= weight[c])) {
      u -= weight[c];
      ++c;
    }
    const auto& keys = *members[c];
    const BucketKey key = keys[static_cast<std::size_t>(rng.Uniform(keys.size()))];
    std::size_t& d = demand[key];
    if (d >= buf.Find(key)->records.size()) continue;
    ++d;
    plan.push_back(key);
  }
  return plan;
}

constexpr uint64_t PolicyTag(const DefenderPolicy& p) { return p.index() + 1; }

uint64_t TrialSeed(const AttackScenario& s, const DefenderPolicy& p, double budget, std::size_t trial) {
  return DeriveSeed(s.seed, {PolicyTag(p), std::bit_cast<uint64_t>(budget), trial});
}

RestrictedDefender AnalyticDefender(const MaskBucketedPolicy& policy, const AttackScenario& s) {
  if (policy.weights.empty()) return RestrictedDefender::UniformOverMasks(s.census, s.connections);
  return RestrictedDefender{policy.weights, s.connections};
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string PolicyName(const DefenderPolicy& policy) {
  switch (policy.index()) {
    case 0: return "naive";
    case 1: return "naive_filter";
    default: return "bucketed";
  }
}

void AttackScenario::Validate() const {
  if (census.empty()) throw InputError("scenario census is empty");
  if (!std::is_sorted(budgets.begin(), budgets.end())) throw InputError("budget grid must be ascending");
  if (!budgets.empty() && !(budgets.front() >= 0.0)) throw InputError("budgets must be nonnegative");
  if (retransmission_factor < 1) throw InputError("retransmission_factor must be at least 1");
  if (connections < 1) throw InputError("H must be at least 1");
  if (trials < 1) throw InputError("trials must be at least 1");
  if (!(bloom_fpr > 0.0 && bloom_fpr < 1.0)) throw InputError("bloom_fpr must lie in (0, 1)");
  if (!(w_att >= 0.0)) throw InputError("W_att must be nonnegative");
  CostModel{cost};
}

MaskAllocation FloodingAllocation(const MaskCensus& census, const MaskCost& cost, double budget) {
  std::vector<std::pair<MaskId, std::size_t>> masks(census.counts().begin(), census.counts().end());
  std::stable_sort(masks.begin(), masks.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });
  MaskAllocation out;
  double left = budget;
  for (const auto& [mask, size] : masks) {
    if (left < cost.c_new + cost.c_node) continue;
    std::size_t n = size;
    if (cost.c_node > 0) {
      n = std::min(n, static_cast<std::size_t>(std::floor((left - cost.c_new) / cost.c_node)));
    }
    if (n == 0) continue;
    out[mask] = n;
    left -= cost.c_new + cost.c_node * static_cast<double>(n);
  }
  return out;
}

MaskAllocation SpreadAllocation(const MaskCensus& census, const SizeAllocation& x) {
  MaskAllocation out;
  for (const auto& [size, count] : x) {
    if (count > census.mass_of_size(size)) {
      throw InfeasibleError("allocation exceeds M_a for mask size " + std::to_string(size));
    }
    std::size_t left = count;
    for (const auto& [mask, n] : census.counts()) {
      if (left == 0) break;
      if (n != size) continue;
      const std::size_t take = std::min(left, n);
      out[mask] = take;
      left -= take;
    }
  }
  return out;
}

double AllocationCost(const MaskCost& cost, const MaskAllocation& alloc) {
  double total = 0.0;
  for (const auto& [mask, n] : alloc) {
    if (n > 0) total += cost.c_new + cost.c_node * static_cast<double>(n);
  }
  return total;
}

MaskCensus SyntheticCensus(const std::map<std::size_t, std::size_t>& masks_per_size, int prefix_len) {
  if (prefix_len < 1 || prefix_len > 24) throw InputError("synthetic census needs 1 <= prefix_len <= 24");
  std::map<MaskId, std::size_t> counts;
  uint32_t next = 1;
  const uint32_t limit = uint32_t{1} << prefix_len;
  for (const auto& [size, count] : masks_per_size) {
    for (std::size_t i = 0; i < count; ++i) {
      if (next >= limit) throw InputError("synthetic census has more masks than prefixes");
      counts[MaskId{next << (32 - prefix_len), prefix_len}] = size;
      ++next;
    }
  }
  return MaskCensus(std::move(counts), prefix_len);
}

double CheapestMaskCost(const MaskCensus& census, const MaskCost& cost) {
  if (census.empty()) throw InputError("empty census");
  return cost.c_new + cost.c_node * static_cast<double>(census.size_histogram().begin()->first);
}

double FullBuyoutCost(const MaskCensus& census, const MaskCost& cost) {
  return cost.c_new * static_cast<double>(census.num_masks()) +
         cost.c_node * static_cast<double>(census.total_nodes());
}

AttackOutcomeCurve RunScenario(const DefenderPolicy& policy, const AttackScenario& s) {
  s.Validate();
  const Universe universe(s.census);
  const auto* bucketed = std::get_if<MaskBucketedPolicy>(&policy);
  std::optional<RestrictedDefender> defender;
  if (bucketed) {
    defender = AnalyticDefender(*bucketed, s);
    defender->Validate(s.census);
  }
  if (const auto* n = std::get_if<NaiveUniformPolicy>(&policy); n && n->capacity < static_cast<std::size_t>(s.connections)) {
    throw InputError("naive capacity below H");
  }
  if (const auto* n = std::get_if<NaiveWithFilterPolicy>(&policy); n && n->capacity < static_cast<std::size_t>(s.connections)) {
    throw InputError("naive capacity below H");
  }

  AttackOutcomeCurve curve{PolicyName(policy), {}};
  for (double budget : s.budgets) {
    CurvePoint pt;
    pt.budget = budget;
    MaskAllocation alloc;
    if (bucketed) {
      const BestResponse br = AttackerBestResponse(*defender, s.census, s.cost, s.w_att, budget);
      alloc = SpreadAllocation(s.census, br.allocation);
      pt.analytic = br.report.success_prob;
    } else {
      alloc = FloodingAllocation(s.census, s.cost, budget);
    }
    pt.spent = AllocationCost(s.cost, alloc);
    const std::vector<uint8_t> owned = universe.Owned(alloc);

    std::vector<uint32_t> honest;
    std::vector<uint32_t> attacker;
    for (std::size_t id = 0; id < universe.size(); ++id) {
      (owned[id] ? attacker : honest).push_back(static_cast<uint32_t>(id));
    }
    pt.attacker_nodes = attacker.size();

    std::size_t wins = 0;
    for (std::size_t trial = 0; trial < s.trials; ++trial) {
      const uint64_t seed = TrialSeed(s, policy, budget, trial);
      Rng rng(seed);
      Shuffle(honest, rng);
      Shuffle(attacker, rng);
      std::vector<uint32_t> chosen;
      if (const auto* p = std::get_if<NaiveUniformPolicy>(&policy)) {
        NaiveBuffer buf(p->capacity, universe.size());
        ForEachAnnouncement(honest, attacker, s.retransmission_factor, false,
                            [&](uint32_t id) { buf.Announce(id, rng); });
        chosen = buf.TakeDistinct(static_cast<std::size_t>(s.connections), rng);
      } else if (const auto* p = std::get_if<NaiveWithFilterPolicy>(&policy)) {
        // Filter hits change nothing, so repeats can be skipped.
        PeerBuffer buf = MakePeerBuffer(
            BucketConfig::ForStream(0, p->capacity, universe.size(), s.bloom_fpr, DeriveSeed(seed, {1})));
        ForEachAnnouncement(honest, attacker, s.retransmission_factor, true,
                            [&](uint32_t id) { buf.Announce(universe.addr(id)); });
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(s.connections), buf.StoredCount());
        const std::vector<BucketKey> plan(n, kGlobalBucket);
        chosen = ToIds(universe, buf.Select(plan));
      } else {
        const std::size_t bucket_size =
            bucketed->bucket_size ? bucketed->bucket_size : static_cast<std::size_t>(s.connections);
        PeerBuffer buf = MakePeerBuffer(BucketConfig::ForStream(
            bucketed->prefix_len, bucket_size, universe.size(), s.bloom_fpr, DeriveSeed(seed, {1})));
        ForEachAnnouncement(honest, attacker, s.retransmission_factor, true,
                            [&](uint32_t id) { buf.Announce(universe.addr(id)); });
        const std::vector<BucketKey> plan = PlanConnections(buf, *bucketed, s.connections, rng);
        chosen = ToIds(universe, buf.Select(plan));
      }
      if (Isolated(chosen, owned)) ++wins;
    }
    const double trials = static_cast<double>(s.trials);
    pt.success = static_cast<double>(wins) / trials;
    pt.stderr_ = std::sqrt(pt.success * (1.0 - pt.success) / trials);
    curve.points.push_back(pt);
  }
  return curve;
}

PolicyComparison ComparePolicies(const AttackScenario& scenario, std::vector<DefenderPolicy> policies) {
  if (policies.empty()) {
    policies = {NaiveUniformPolicy{}, NaiveWithFilterPolicy{}, MaskBucketedPolicy{}};
  }
  PolicyComparison out;
  for (const auto& p : policies) out.curves.push_back(RunScenario(p, scenario));

  DominanceSummary& sum = out.summary;
  sum.range_low = CheapestMaskCost(scenario.census, scenario.cost);
  sum.range_high = FullBuyoutCost(scenario.census, scenario.cost);

  const AttackOutcomeCurve* bucket = nullptr;
  const AttackOutcomeCurve* naive = nullptr;
  std::vector<const AttackOutcomeCurve*> naives;
  for (const auto& c : out.curves) {
    if (c.policy == "bucketed") bucket = &c;
    if (c.policy == "naive") naive = &c;
    if (c.policy == "naive" || c.policy == "naive_filter") naives.push_back(&c);
  }

  for (std::size_t i = 0; i < scenario.budgets.size(); ++i) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& c : out.curves) ranked.emplace_back(c.points[i].success, c.policy);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& l, const auto& r) { return l.first < r.first; });
    std::string order;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      if (k > 0) order += ranked[k - 1].first == ranked[k].first ? "=" : "<";
      order += ranked[k].second;
    }
    sum.per_budget.push_back({scenario.budgets[i], order});

    if (!bucket) continue;
    const CurvePoint& b = bucket->points[i];
    for (const auto* n : naives) {
      const CurvePoint& q = n->points[i];
      const double slack = 3.0 * std::hypot(b.stderr_, q.stderr_);
      if (b.budget >= sum.range_low && b.budget <= sum.range_high && b.success > q.success + slack) {
        sum.violations.push_back(n->policy + "@" + Fmt(b.budget));
      }
      if (b.budget >= sum.range_high && std::abs(b.success - q.success) > slack) {
        sum.converges_at_full_coverage = false;
      }
    }
    if (naive && !sum.overwhelmed_budget && naive->points[i].success >= 0.99 && b.success <= 0.01) {
      sum.overwhelmed_budget = b.budget;
    }
  }
  return out;
}

void WriteCurvesCsv(const std::vector<AttackOutcomeCurve>& curves, std::ostream& out) {
  out << "policy,budget,success,stderr\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.policy << ',' << Fmt(p.budget) << ',' << Fmt(p.success) << ',' << Fmt(p.stderr_) << '\n';
    }
  }
}

}  // namespace peershield
