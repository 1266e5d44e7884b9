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

// Restricted-memory peer buffer.
//
// Announced addresses are grouped into buckets by an equivalence key (the
// /16 mask by default, or one global bucket). Each bucket keeps at most
// `bucket_size` records and counts every announcement that passes the Bloom
// filter. A filter-passing announcement is admitted with probability
// bucket_size / history, replacing a uniformly chosen incumbent when the
// bucket is full. After l distinct announcements into a bucket, each of them
// is stored with probability bucket_size / l, so a uniform draw from the
// bucket is a uniform draw from everything the bucket was ever offered.
//
// Randomness comes from a `Source` exposing
//   bool Bernoulli(uint64_t num, uint64_t den);   // P = num / den
//   uint64_t Uniform(uint64_t n);                 // [0, n)
// which is `Rng` in production and a scripted enumerator in tests.

#ifndef PEERSHIELD_BUFFER_H_
#define PEERSHIELD_BUFFER_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "peershield/addr.h"
#include "peershield/bloom.h"
#include "peershield/errors.h"
#include "peershield/random.h"

namespace peershield {

// prefix_len == 0 selects the single global bucket.
using BucketKey = MaskId;
inline constexpr BucketKey kGlobalBucket{0, 0};

inline BucketKey BucketKeyOf(PeerAddr addr, int prefix_len) {
  return prefix_len == 0 ? kGlobalBucket : MaskOf(addr, prefix_len);
}
std::string BucketKeyToString(const BucketKey& key);

struct BucketConfig {
  int prefix_len = kDefaultPrefixLen;  // 0: one global bucket
  std::size_t bucket_size = 8;
  std::size_t bloom_bytes = 4096;
  int bloom_hashes = 7;
  uint64_t seed = 0;

  // Filter sized for `expected_announcements` distinct addresses at `fpr`.
  static BucketConfig ForStream(int prefix_len, std::size_t bucket_size,
                                std::size_t expected_announcements, double fpr,
                                uint64_t seed);
  void Validate() const;
};

struct Bucket {
  std::vector<PeerAddr> records;
  uint64_t history = 0;  // filter-passing announcements seen
};

enum class AnnounceResult { kKnown, kAdmitted, kDeclined };

struct MemoryFootprint {
  std::size_t records = 0;
  std::size_t filter_bytes = 0;
};

// Stored-record capacity of `num_buckets` buckets plus the filter.
MemoryFootprint Footprint(const BucketConfig& cfg, std::size_t num_buckets);

void WriteBufferDump(const BucketConfig& cfg, const std::map<BucketKey, Bucket>& buckets,
                     std::ostream& header_json, std::ostream& records_csv);

template <typename Source>
class BasicPeerBuffer {
 public:
  BasicPeerBuffer(const BucketConfig& cfg, Source source)
      : cfg_((cfg.Validate(), cfg)),
        filter_(cfg.bloom_bytes * 8, cfg.bloom_hashes, DeriveSeed(cfg.seed, {0xb100})),
        source_(std::move(source)) {}

  AnnounceResult Announce(PeerAddr addr) {
    if (filter_.Contains(addr)) return AnnounceResult::kKnown;
    filter_.Insert(addr);
    Bucket& bucket = buckets_[BucketKeyOf(addr, cfg_.prefix_len)];
    ++bucket.history;
    if (!source_.Bernoulli(cfg_.bucket_size, bucket.history)) return AnnounceResult::kDeclined;
    if (bucket.records.size() >= cfg_.bucket_size) {
      const auto victim = static_cast<std::size_t>(source_.Uniform(bucket.records.size()));
      bucket.records[victim] = addr;
    } else {
      bucket.records.push_back(addr);
    }
    return AnnounceResult::kAdmitted;
  }

  // One address per plan entry, drawn uniformly without replacement from the
  // entry's bucket. Output follows plan order. Throws ShortfallError when a
  // bucket holds fewer records than the plan asks of it.
  std::vector<PeerAddr> Select(std::span<const BucketKey> plan) {
    return SelectLive(plan, [](PeerAddr) { return true; });
  }

  // As Select, restricted to records for which `alive` holds.
  template <typename Alive>
  std::vector<PeerAddr> SelectLive(std::span<const BucketKey> plan, Alive&& alive) {
    std::map<BucketKey, std::size_t> demand;
    for (const auto& key : plan) ++demand[key];
    std::map<BucketKey, std::vector<PeerAddr>> drawn;
    // Draw per bucket in plan order of first appearance so the consumed
    // randomness does not depend on map ordering.
    for (const auto& key : plan) {
      if (drawn.contains(key)) continue;
      std::vector<PeerAddr> pool;
      if (auto it = buckets_.find(key); it != buckets_.end()) {
        for (PeerAddr a : it->second.records) {
          if (alive(a)) pool.push_back(a);
        }
      }
      const std::size_t want = demand[key];
      if (pool.size() < want) throw ShortfallError(BucketKeyToString(key), want, pool.size());
      for (std::size_t i = 0; i < want; ++i) {
        const auto j = i + static_cast<std::size_t>(source_.Uniform(pool.size() - i));
        std::swap(pool[i], pool[j]);
      }
      pool.resize(want);
      drawn.emplace(key, std::move(pool));
    }
    std::vector<PeerAddr> out;
    out.reserve(plan.size());
    std::map<BucketKey, std::size_t> used;
    for (const auto& key : plan) out.push_back(drawn[key][used[key]++]);
    return out;
  }

  void Reset() {
    buckets_.clear();
    filter_.Clear();
  }

  const BucketConfig& config() const { return cfg_; }
  const BloomFilter& filter() const { return filter_; }
  const std::map<BucketKey, Bucket>& buckets() const { return buckets_; }
  Source& source() { return source_; }

  const Bucket* Find(const BucketKey& key) const {
    auto it = buckets_.find(key);
    return it == buckets_.end() ? nullptr : &it->second;
  }
  bool Stores(PeerAddr addr) const {
    const Bucket* b = Find(BucketKeyOf(addr, cfg_.prefix_len));
    return b && std::find(b->records.begin(), b->records.end(), addr) != b->records.end();
  }
  std::size_t StoredCount() const {
    std::size_t n = 0;
    for (const auto& [key, b] : buckets_) n += b.records.size();
    return n;
  }

  // Distinct records per bucket, size bound, history >= occupancy, and every
  // stored record known to the filter.
  bool CheckInvariants() const {
    for (const auto& [key, b] : buckets_) {
      if (b.records.size() > cfg_.bucket_size || b.history < b.records.size()) return false;
      std::vector<PeerAddr> sorted = b.records;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
      for (PeerAddr a : b.records) {
        if (!filter_.Contains(a) || BucketKeyOf(a, cfg_.prefix_len) != key) return false;
      }
    }
    return true;
  }

  void Dump(std::ostream& header_json, std::ostream& records_csv) const {
    WriteBufferDump(cfg_, buckets_, header_json, records_csv);
  }

 private:
  BucketConfig cfg_;
  BloomFilter filter_;
  std::map<BucketKey, Bucket> buckets_;
  Source source_;
};

using PeerBuffer = BasicPeerBuffer<Rng>;

inline PeerBuffer MakePeerBuffer(const BucketConfig& cfg) {
  return PeerBuffer(cfg, Rng(DeriveSeed(cfg.seed, {0x5e1ec7})));
}

// Two buffer copies wiped alternately so that, from the first period on, the
// copy serving selections has absorbed at least one full period of
// announcements. Copy 0 is wiped at 2nT, copy 1 at (2n+1)T, n >= 1. During
// [0, T) copy 0 serves with partial history (cold start).
template <typename Source>
class BasicEpochPair {
 public:
  BasicEpochPair(const BucketConfig& cfg, uint64_t period, Source s0, Source s1)
      : period_(period),
        copies_{BasicPeerBuffer<Source>(WithSeed(cfg, 0), std::move(s0)),
                BasicPeerBuffer<Source>(WithSeed(cfg, 1), std::move(s1))} {
    if (period == 0) throw InputError("epoch period must be positive");
  }

  // Processes every period boundary in (last time, now]. Time never moves
  // backwards; earlier `now` values are ignored.
  void Advance(uint64_t now) {
    const uint64_t target = now / period_;
    while (epoch_ < target) {
      ++epoch_;
      copies_[epoch_ % 2].Reset();
    }
  }

  // Both copies see every announcement.
  void Announce(PeerAddr addr) {
    copies_[0].Announce(addr);
    copies_[1].Announce(addr);
  }

  // The copy not wiped at the most recent boundary.
  BasicPeerBuffer<Source>& Serving() { return copies_[ServingIndex()]; }
  const BasicPeerBuffer<Source>& Serving() const { return copies_[ServingIndex()]; }
  BasicPeerBuffer<Source>& Warming() { return copies_[1 - ServingIndex()]; }

  std::size_t ServingIndex() const { return epoch_ == 0 ? 0 : (epoch_ + 1) % 2; }
  uint64_t epoch() const { return epoch_; }
  uint64_t period() const { return period_; }

 private:
  static BucketConfig WithSeed(BucketConfig cfg, uint64_t copy) {
    cfg.seed = DeriveSeed(cfg.seed, {0xe90c, copy});
    return cfg;
  }

  uint64_t period_;
  uint64_t epoch_ = 0;
  BasicPeerBuffer<Source> copies_[2];
};

using EpochPair = BasicEpochPair<Rng>;

inline EpochPair MakeEpochPair(const BucketConfig& cfg, uint64_t period) {
  return EpochPair(cfg, period, Rng(DeriveSeed(cfg.seed, {0xe90c, 0, 1})),
                   Rng(DeriveSeed(cfg.seed, {0xe90c, 1, 1})));
}

}  // namespace peershield

#endif  // PEERSHIELD_BUFFER_H_
