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

#ifndef PEERSHIELD_BLOOM_H_
#define PEERSHIELD_BLOOM_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "peershield/addr.h"

namespace peershield {

// Bit count and probe count for a filter.
struct BloomSizing {
  std::size_t bits = 0;
  int hashes = 0;
};

// m = ceil(-n ln p / ln^2 2), k = max(1, round((m / n) ln 2)).
BloomSizing SizeForFalsePositiveRate(std::size_t expected_items, double fpr);
// m = 8 * bytes, k = max(1, round((m / n) ln 2)).
BloomSizing SizeForBytes(std::size_t bytes, std::size_t expected_items);

// (1 - e^{-kn/m})^k
double TheoreticalFalsePositiveRate(std::size_t bits, int hashes, std::size_t items);

// Plain bit-array Bloom filter over IPv4 addresses. Probe i lands on
// (h1 + i * h2) mod m, with h1, h2 two seeded 64-bit mixes of the address.
// Single writer; no synchronization.
class BloomFilter {
 public:
  // Throws InputError when bits == 0 or hashes < 1.
  BloomFilter(std::size_t bits, int hashes, uint64_t seed);

  void Insert(PeerAddr addr);
  bool Contains(PeerAddr addr) const;
  void Clear();

  std::size_t bits() const { return bits_; }
  int hashes() const { return hashes_; }
  uint64_t seed() const { return seed_; }
  std::size_t inserted() const { return inserted_; }
  std::size_t PopCount() const;

 private:
  std::size_t bits_;
  int hashes_;
  uint64_t seed_;
  uint64_t salt_;
  std::size_t inserted_ = 0;
  std::vector<uint64_t> words_;
};

}  // namespace peershield

#endif  // PEERSHIELD_BLOOM_H_
