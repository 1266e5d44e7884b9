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

#include "peershield/bloom.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "peershield/errors.h"
#include "peershield/random.h"

namespace peershield {

BloomSizing SizeForFalsePositiveRate(std::size_t expected_items, double fpr) {
  if (!(fpr > 0.0 && fpr < 1.0)) throw InputError("false-positive rate must be in (0, 1)");
  const double n = static_cast<double>(std::max<std::size_t>(expected_items, 1));
  const double ln2 = std::log(2.0);
  const auto bits = static_cast<std::size_t>(std::ceil(-n * std::log(fpr) / (ln2 * ln2)));
  return SizeForBytes((bits + 7) / 8, expected_items);
}

BloomSizing SizeForBytes(std::size_t bytes, std::size_t expected_items) {
  if (bytes == 0) throw InputError("Bloom filter needs at least one byte");
  const std::size_t bits = bytes * 8;
  const double n = static_cast<double>(std::max<std::size_t>(expected_items, 1));
  const int k = std::max(1, static_cast<int>(std::lround(bits / n * std::log(2.0))));
  return {bits, k};
}

double TheoreticalFalsePositiveRate(std::size_t bits, int hashes, std::size_t items) {
  const double k = hashes;
  return std::pow(1.0 - std::exp(-k * static_cast<double>(items) / static_cast<double>(bits)), k);
}

BloomFilter::BloomFilter(std::size_t bits, int hashes, uint64_t seed)
    : bits_(bits), hashes_(hashes), seed_(seed), salt_(Mix64(seed ^ 0x5bf03635f0b5a1c3ULL)) {
  if (bits == 0) throw InputError("Bloom filter needs at least one bit");
  if (hashes < 1) throw InputError("Bloom filter needs at least one probe");
  words_.assign((bits + 63) / 64, 0);
}

void BloomFilter::Insert(PeerAddr addr) {
  const uint64_t step = (Mix64(addr.ip ^ salt_) | 1) % bits_;
  uint64_t bit = Mix64(addr.ip ^ seed_) % bits_;
  for (int i = 0; i < hashes_; ++i) {
    words_[bit >> 6] |= uint64_t{1} << (bit & 63);
    bit += step;
    if (bit >= bits_) bit -= bits_;
  }
  ++inserted_;
}

bool BloomFilter::Contains(PeerAddr addr) const {
  const uint64_t step = (Mix64(addr.ip ^ salt_) | 1) % bits_;
  uint64_t bit = Mix64(addr.ip ^ seed_) % bits_;
  for (int i = 0; i < hashes_; ++i) {
    if ((words_[bit >> 6] & (uint64_t{1} << (bit & 63))) == 0) return false;
    bit += step;
    if (bit >= bits_) bit -= bits_;
  }
  return true;
}

void BloomFilter::Clear() {
  std::fill(words_.begin(), words_.end(), 0);
  inserted_ = 0;
}

std::size_t BloomFilter::PopCount() const {
  std::size_t n = 0;
  for (uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

}  // namespace peershield
