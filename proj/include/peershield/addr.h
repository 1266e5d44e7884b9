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

// IPv4 peer addresses, subnet-mask classes, and snapshot statistics.

#ifndef PEERSHIELD_ADDR_H_
#define PEERSHIELD_ADDR_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace peershield {

inline constexpr int kDefaultPrefixLen = 16;

struct PeerAddr {
  uint32_t ip = 0;

  friend auto operator<=>(const PeerAddr&, const PeerAddr&) = default;
};

// Strict dotted-quad parser: four decimal octets in [0, 255], no leading
// '+', no whitespace, at most three digits per octet.
std::optional<PeerAddr> ParseAddr(std::string_view text);
std::string ToString(PeerAddr addr);

// The high-order `prefix_len` bits of an address.
struct MaskId {
  uint32_t prefix = 0;
  int prefix_len = kDefaultPrefixLen;

  friend auto operator<=>(const MaskId&, const MaskId&) = default;
};

// Requires 0 < prefix_len <= 32; throws InputError otherwise.
MaskId MaskOf(PeerAddr addr, int prefix_len = kDefaultPrefixLen);
// "10.1.0.0/16"
std::string ToString(const MaskId& mask);

// Reads a snapshot: one dotted quad per line, '#' comments and blank lines
// skipped, LF or CRLF endings. Duplicates are preserved in file order.
// Throws ParseError carrying the 1-based line number of the first bad line.
std::vector<PeerAddr> ParseSnapshot(std::istream& in);

// Per-mask node counts of a deduplicated address set, and the derived
// mask-size histogram: size_histogram[a] = M_a, the number of nodes living in
// masks that hold exactly `a` nodes.
class MaskCensus {
 public:
  MaskCensus() = default;
  // Builds from explicit per-mask counts. Zero counts are dropped.
  MaskCensus(std::map<MaskId, std::size_t> counts, int prefix_len);

  const std::map<MaskId, std::size_t>& counts() const { return counts_; }
  const std::map<std::size_t, std::size_t>& size_histogram() const { return size_histogram_; }
  int prefix_len() const { return prefix_len_; }

  bool empty() const { return counts_.empty(); }
  std::size_t total_nodes() const { return total_nodes_; }
  std::size_t num_masks() const { return counts_.size(); }
  // Number of masks holding exactly `size` nodes (M_a / a).
  std::size_t masks_of_size(std::size_t size) const;
  // M_a; zero when no mask has that size.
  std::size_t mass_of_size(std::size_t size) const;

 private:
  std::map<MaskId, std::size_t> counts_;
  std::map<std::size_t, std::size_t> size_histogram_;
  std::size_t total_nodes_ = 0;
  int prefix_len_ = kDefaultPrefixLen;
};

MaskCensus Census(std::span<const PeerAddr> addrs, int prefix_len = kDefaultPrefixLen);

// Sum over mask sizes present of -log10(M_a), i.e. log10 of prod_a 1/M_a.
// Throws InputError on an empty census.
double InverseMassProductLog10(const MaskCensus& census);

// `mask_size,num_masks,M_a`, ascending by mask size.
void WriteHistogramCsv(const MaskCensus& census, std::ostream& out);
// `mask,count`, ascending by mask.
void WriteCountsCsv(const MaskCensus& census, std::ostream& out);

}  // namespace peershield

template <>
struct std::hash<peershield::PeerAddr> {
  std::size_t operator()(const peershield::PeerAddr& a) const noexcept {
    return std::hash<uint32_t>{}(a.ip);
  }
};

#endif  // PEERSHIELD_ADDR_H_
