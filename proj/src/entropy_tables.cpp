// Copyright 2026 The jpegai-core Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "jpegai/entropy.hpp"
#include "jpegai/error.hpp"

namespace jpegai {
namespace {

double phi(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

// Probability of integer v under N(0, sigma^2).
double gaussian_mass(double sigma, int v) { return phi((v + 0.5) / sigma) - phi((v - 0.5) / sigma); }

// How far past the bound the escape cost is summed; mass beyond is negligible
// for every sigma we build.
constexpr int kEscapeCostHorizon = 200;

}  // namespace

int CdfTable::active(int r) const {
  const auto counts_row = row(r);
  int n = 0;
  while (n < alphabet && counts_row[n] != 0) ++n;
  return n;
}

int CdfTable::cumulative(int r, int s) const {
  const auto counts_row = row(r);
  return std::accumulate(counts_row.begin(), counts_row.begin() + s, 0);
}

void CdfTable::validate() const {
  if (rows <= 0 || alphabet <= 0 || alphabet > kStates) throw Error("CDF table: bad shape");
  if (counts.size() != static_cast<std::size_t>(rows) * alphabet || bounds.size() != static_cast<std::size_t>(rows)) {
    throw Error("CDF table: storage does not match shape");
  }
  for (int r = 0; r < rows; ++r) {
    const auto counts_row = row(r);
    const int n = active(r);
    for (int s = n; s < alphabet; ++s) {
      if (counts_row[s] != 0) throw Error("CDF table row " + std::to_string(r) + ": zero count inside active range");
    }
    const int b = bounds[r];
    if (n == 0 || (n != 2 * b && n != 2 * b + 1)) {
      throw Error("CDF table row " + std::to_string(r) + ": active slots do not match bound");
    }
    const int sum = std::accumulate(counts_row.begin(), counts_row.end(), 0);
    if (sum != kStates) throw Error("CDF table row " + std::to_string(r) + ": counts do not sum to 256");
  }
}

std::vector<uint16_t> gaussian_row_counts(double sigma, int bound) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error("gaussian row: sigma must be positive");
  if (bound < 1 || 2 * bound + 1 > kStates) throw Error("gaussian row: bound out of range");
  const int n = 2 * bound + 1;
  std::vector<double> p(n);
  // Slot 0 is the escape marker and collects both tails.
  p[0] = phi((-bound + 0.5) / sigma) + 1.0 - phi((bound + 0.5) / sigma);
  for (int s = 1; s < n; ++s) p[s] = gaussian_mass(sigma, s - bound);

  const int spare = kStates - n;
  std::vector<double> raw(n);
  std::vector<uint16_t> counts(n);
  int used = 0;
  for (int s = 0; s < n; ++s) {
    raw[s] = p[s] * spare;
    counts[s] = static_cast<uint16_t>(1 + static_cast<int>(std::floor(raw[s])));
    used += counts[s];
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return raw[a] - std::floor(raw[a]) > raw[b] - std::floor(raw[b]);
  });
  const int left = kStates - used;
  if (left < 0 || left > n) throw Error("gaussian row: cannot renormalise counts");
  for (int k = 0; k < left; ++k) ++counts[order[k]];
  return counts;
}

double expected_row_cost(double sigma, int bound) {
  const auto counts = gaussian_row_counts(sigma, bound);
  const int n = static_cast<int>(counts.size());
  double bits = 0.0;
  for (int s = 1; s < n; ++s) {
    bits += gaussian_mass(sigma, s - bound) * -std::log2(counts[s] / double(kStates));
  }
  const double marker_bits = -std::log2(counts[0] / double(kStates));
  auto payload_bits = [](int extra) {
    return 2 + (extra < (1 << kEscapeShortBits) ? kEscapeShortBits : kEscapeLongBits);
  };
  // Escaped values: v <= -b with extra -v-b, and v >= b+1 with extra v-b.
  for (int extra = 0; extra < kEscapeCostHorizon; ++extra) {
    bits += gaussian_mass(sigma, -bound - extra) * (marker_bits + payload_bits(extra));
    if (extra > 0) bits += gaussian_mass(sigma, bound + extra) * (marker_bits + payload_bits(extra));
  }
  return bits;
}

int choose_bound(double sigma, int max_bound) {
  int best = 1;
  double best_cost = expected_row_cost(sigma, 1);
  for (int b = 2; b <= max_bound; ++b) {
    const double cost = expected_row_cost(sigma, b);
    if (cost < best_cost) {
      best_cost = cost;
      best = b;
    }
  }
  while (best < max_bound && gaussian_row_counts(sigma, best)[0] > 1) ++best;
  return best;
}

std::vector<double> residual_sigma_bins() {
  std::vector<double> bins(kResidualRows);
  for (int k = 0; k < kResidualRows; ++k) bins[k] = 0.08 * std::exp(11.0 * k / 64.0);
  return bins;
}

std::vector<double> hyper_sigma_bins() {
  // Low channel indices carry the coarse bands and get the widest models.
  std::vector<double> bins(kHyperRows);
  for (int r = 0; r < kHyperRows; ++r) bins[r] = 4.0 * std::pow(0.3 / 4.0, r / double(kHyperRows - 1));
  return bins;
}

CdfTable build_gaussian_cdf(std::span<const double> sigma_bins, int alphabet, int max_bound) {
  if (sigma_bins.empty()) throw Error("gaussian CDF: no sigma bins");
  if (2 * max_bound + 1 > alphabet) throw Error("gaussian CDF: bound does not fit the alphabet");
  const bool rising = sigma_bins.size() < 2 || sigma_bins[1] > sigma_bins[0];
  for (std::size_t k = 0; k < sigma_bins.size(); ++k) {
    if (!(sigma_bins[k] > 0.0) || !std::isfinite(sigma_bins[k])) throw Error("gaussian CDF: sigma must be positive");
    if (k > 0 && (rising ? sigma_bins[k] <= sigma_bins[k - 1] : sigma_bins[k] >= sigma_bins[k - 1])) {
      throw Error("gaussian CDF: sigma bins must be strictly monotone");
    }
  }
  CdfTable cdf;
  cdf.rows = static_cast<int>(sigma_bins.size());
  cdf.alphabet = alphabet;
  cdf.counts.assign(static_cast<std::size_t>(cdf.rows) * alphabet, 0);
  cdf.bounds.resize(cdf.rows);
  for (int r = 0; r < cdf.rows; ++r) {
    const int b = choose_bound(sigma_bins[r], max_bound);
    const auto counts = gaussian_row_counts(sigma_bins[r], b);
    std::copy(counts.begin(), counts.end(), cdf.counts.begin() + static_cast<std::ptrdiff_t>(r) * alphabet);
    cdf.bounds[r] = static_cast<uint16_t>(b);
  }
  cdf.validate();
  return cdf;
}

CdfTable default_residual_cdf() {
  const auto bins = residual_sigma_bins();
  return build_gaussian_cdf(bins, kResidualAlphabet, kMaxResidualBound);
}

CdfTable default_hyper_cdf() {
  const auto bins = hyper_sigma_bins();
  return build_gaussian_cdf(bins, kHyperAlphabet, kMaxHyperBound);
}

double row_entropy(std::span<const uint16_t> counts) {
  double h = 0.0;
  for (uint16_t c : counts) {
    if (c == 0) continue;
    const double p = c / double(kStates);
    h -= p * std::log2(p);
  }
  return h;
}

TansTables build_tans_tables(const CdfTable& cdf) {
  cdf.validate();
  TansTables tables;
  tables.alphabet = cdf.alphabet;
  tables.rows.resize(cdf.rows);
  constexpr int kSpreadStep = (kStates >> 1) + (kStates >> 3) + 3;

  for (int r = 0; r < cdf.rows; ++r) {
    TansRow& row = tables.rows[r];
    row.bound = cdf.bounds[r];
    row.active = cdf.active(r);
    const auto counts = cdf.row(r);
    row.counts.assign(counts.begin(), counts.begin() + row.active);
    row.cumulative.assign(row.active + 1, 0);
    for (int s = 0; s < row.active; ++s) row.cumulative[s + 1] = row.cumulative[s] + row.counts[s];

    std::array<uint16_t, kStates> spread{};
    int pos = 0;
    for (int s = 0; s < row.active; ++s) {
      for (int k = 0; k < row.counts[s]; ++k) {
        spread[pos] = static_cast<uint16_t>(s);
        pos = (pos + kSpreadStep) & (kStates - 1);
      }
    }

    std::vector<uint32_t> next_x(row.counts.begin(), row.counts.end());
    std::vector<uint16_t> rank(row.active, 0);
    for (int u = 0; u < kStates; ++u) {
      const int s = spread[u];
      const uint32_t x = next_x[s]++;
      const int nbits = kTableLog - (std::bit_width(x) - 1);
      row.decode[u] = DecodeEntry{static_cast<int16_t>(s - row.bound), static_cast<uint8_t>(nbits),
                                  static_cast<uint8_t>((x << nbits) - kStates)};
      row.encode[row.cumulative[s] + rank[s]++] = static_cast<uint16_t>(u);
    }
  }
  return tables;
}

std::array<int32_t, kResidualRows> default_sigma_edges() {
  std::array<int32_t, kResidualRows> edges{};
  for (int k = 0; k < kResidualRows; ++k) edges[k] = 1235 + 11 * k;
  return edges;
}

std::array<int32_t, 8> default_skip_ladder() {
  const auto edges = default_sigma_edges();
  std::array<int32_t, 8> ladder{};
  ladder[0] = INT32_MIN;
  for (int k = 1; k < 8; ++k) ladder[k] = edges[k];
  return ladder;
}

SigmaQuantizer::SigmaQuantizer() : SigmaQuantizer(default_sigma_edges()) {}

SigmaQuantizer::SigmaQuantizer(std::span<const int32_t> edges) {
  if (edges.size() != kResidualRows) throw Error("sigma quantizer: expected 32 edges");
  for (int k = 0; k < kResidualRows; ++k) {
    if (k > 0 && edges[k] <= edges[k - 1]) throw Error("sigma quantizer: edges must be strictly increasing");
    edges_[k] = edges[k];
  }
  int r = 0;
  for (int v = 0; v < kSigmaLevels; ++v) {
    while (r + 1 < kResidualRows && v >= edges_[r + 1]) ++r;
    lut_[v] = static_cast<uint8_t>(r);
  }
}

CubeFlags::CubeFlags(const Shape3& plane)
    : cubes_h_(ceil_div(plane.height, kCubeSize)),
      cubes_w_(ceil_div(plane.width, kCubeSize)),
      flags_(static_cast<std::size_t>(ceil_div(plane.channels, kCubeSize)) * cubes_h_ * cubes_w_, 0) {}

std::size_t CubeFlags::set_count() const { return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), 1)); }

std::vector<uint8_t> CubeFlags::serialize() const {
  std::vector<uint8_t> out(byte_size(), 0);
  for (std::size_t k = 0; k < flags_.size(); ++k) {
    if (flags_[k]) out[k >> 3] |= static_cast<uint8_t>(1u << (k & 7));
  }
  return out;
}

CubeFlags CubeFlags::parse(const Shape3& plane, std::span<const uint8_t> bytes, std::size_t base_offset) {
  CubeFlags flags(plane);
  const std::size_t need = flags.byte_size();
  if (bytes.size() < need) throw FormatError("cube flags truncated", base_offset + bytes.size());
  for (std::size_t k = 0; k < flags.flags_.size(); ++k) flags.flags_[k] = (bytes[k >> 3] >> (k & 7)) & 1;
  const std::size_t tail = flags.flags_.size() & 7;
  if (tail != 0 && (bytes[need - 1] >> tail) != 0) throw FormatError("cube flag padding bits set", base_offset + need - 1);
  return flags;
}

}  // namespace jpegai
