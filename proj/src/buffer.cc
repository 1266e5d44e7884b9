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

#include "peershield/buffer.h"

#include <ostream>

#include "json.hpp"

namespace peershield {

std::string BucketKeyToString(const BucketKey& key) {
  return key.prefix_len == 0 ? std::string("*") : ToString(key);
}

BucketConfig BucketConfig::ForStream(int prefix_len, std::size_t bucket_size,
                                     std::size_t expected_announcements, double fpr,
                                     uint64_t seed) {
  const BloomSizing sizing = SizeForFalsePositiveRate(expected_announcements, fpr);
  BucketConfig cfg;
  cfg.prefix_len = prefix_len;
  cfg.bucket_size = bucket_size;
  cfg.bloom_bytes = (sizing.bits + 7) / 8;
  cfg.bloom_hashes = sizing.hashes;
  cfg.seed = seed;
  return cfg;
}

void BucketConfig::Validate() const {
  if (bucket_size < 1) throw InputError("bucket_size must be at least 1");
  if (bloom_bytes < 1) throw InputError("bloom_bytes must be at least 1");
  if (bloom_hashes < 1) throw InputError("bloom_hashes must be at least 1");
  if (prefix_len < 0 || prefix_len > 32) throw InputError("prefix_len must be in [0, 32]");
}

MemoryFootprint Footprint(const BucketConfig& cfg, std::size_t num_buckets) {
  return {num_buckets * cfg.bucket_size, cfg.bloom_bytes};
}

void WriteBufferDump(const BucketConfig& cfg, const std::map<BucketKey, Bucket>& buckets,
                     std::ostream& header_json, std::ostream& records_csv) {
  nlohmann::ordered_json header;
  header["config"] = {{"prefix_len", cfg.prefix_len},
                      {"bucket_size", cfg.bucket_size},
                      {"bloom_bytes", cfg.bloom_bytes},
                      {"bloom_hashes", cfg.bloom_hashes},
                      {"seed", cfg.seed}};
  nlohmann::ordered_json history = nlohmann::ordered_json::object();
  records_csv << "bucket_key,addr\n";
  for (const auto& [key, bucket] : buckets) {
    const std::string name = BucketKeyToString(key);
    history[name] = bucket.history;
    std::vector<PeerAddr> sorted = bucket.records;
    std::sort(sorted.begin(), sorted.end());
    for (PeerAddr a : sorted) records_csv << name << ',' << ToString(a) << '\n';
  }
  header["history"] = std::move(history);
  header_json << header.dump(2) << '\n';
}

}  // namespace peershield
