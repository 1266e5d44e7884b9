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

#include "peershield/addr.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "peershield/errors.h"

namespace peershield {

std::optional<PeerAddr> ParseAddr(std::string_view text) {
  uint32_t ip = 0;
  std::size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (pos >= text.size() || text[pos] != '.') return std::nullopt;
      ++pos;
    }
    std::size_t digits = 0;
    uint32_t value = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (++digits > 3) return std::nullopt;
      value = value * 10 + static_cast<uint32_t>(text[pos] - '0');
      ++pos;
    }
    if (digits == 0 || value > 255) return std::nullopt;
    ip = (ip << 8) | value;
  }
  if (pos != text.size()) return std::nullopt;
  return PeerAddr{ip};
}

std::string ToString(PeerAddr addr) {
  return std::to_string(addr.ip >> 24) + "." + std::to_string((addr.ip >> 16) & 0xff) +
         "." + std::to_string((addr.ip >> 8) & 0xff) + "." + std::to_string(addr.ip & 0xff);
}

MaskId MaskOf(PeerAddr addr, int prefix_len) {
  if (prefix_len <= 0 || prefix_len > 32) {
    throw InputError("prefix length must be in (0, 32], got " + std::to_string(prefix_len));
  }
  const uint32_t keep = prefix_len == 32 ? ~uint32_t{0} : ~(~uint32_t{0} >> prefix_len);
  return MaskId{addr.ip & keep, prefix_len};
}

std::string ToString(const MaskId& mask) {
  return ToString(PeerAddr{mask.prefix}) + "/" + std::to_string(mask.prefix_len);
}

std::vector<PeerAddr> ParseSnapshot(std::istream& in) {
  std::vector<PeerAddr> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty() || view.front() == '#') continue;
    auto addr = ParseAddr(view);
    if (!addr) throw ParseError(line_no, "not a dotted-quad IPv4 address: '" + std::string(view) + "'");
    out.push_back(*addr);
  }
  return out;
}

MaskCensus::MaskCensus(std::map<MaskId, std::size_t> counts, int prefix_len)
    : prefix_len_(prefix_len) {
  for (auto& [mask, n] : counts) {
    if (n == 0) continue;
    counts_.emplace(mask, n);
    size_histogram_[n] += n;
    total_nodes_ += n;
  }
}

std::size_t MaskCensus::masks_of_size(std::size_t size) const {
  return size == 0 ? 0 : mass_of_size(size) / size;
}

std::size_t MaskCensus::mass_of_size(std::size_t size) const {
  auto it = size_histogram_.find(size);
  return it == size_histogram_.end() ? 0 : it->second;
}

MaskCensus Census(std::span<const PeerAddr> addrs, int prefix_len) {
  std::set<PeerAddr> distinct(addrs.begin(), addrs.end());
  std::map<MaskId, std::size_t> counts;
  for (PeerAddr a : distinct) ++counts[MaskOf(a, prefix_len)];
  return MaskCensus(std::move(counts), prefix_len);
}

double InverseMassProductLog10(const MaskCensus& census) {
  if (census.empty()) throw InputError("inverse mass product of an empty census");
  double log10_product = 0.0;
  for (const auto& [size, mass] : census.size_histogram()) {
    log10_product -= std::log10(static_cast<double>(mass));
  }
  return log10_product;
}

void WriteHistogramCsv(const MaskCensus& census, std::ostream& out) {
  out << "mask_size,num_masks,M_a\n";
  for (const auto& [size, mass] : census.size_histogram()) {
    out << size << ',' << mass / size << ',' << mass << '\n';
  }
}

void WriteCountsCsv(const MaskCensus& census, std::ostream& out) {
  out << "mask,count\n";
  for (const auto& [mask, n] : census.counts()) out << ToString(mask) << ',' << n << '\n';
}

}  // namespace peershield
