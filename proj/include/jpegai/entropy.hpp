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

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "jpegai/exec.hpp"
#include "jpegai/tensor.hpp"

namespace jpegai {

inline constexpr int kTableLog = 8;
inline constexpr int kStates = 1 << kTableLog;
inline constexpr int kResidualRows = 32;
inline constexpr int kResidualAlphabet = 256;
inline constexpr int kHyperRows = 128;
inline constexpr int kHyperAlphabet = 64;
inline constexpr int kMaxResidualBound = 127;
inline constexpr int kMaxHyperBound = 31;
inline constexpr int kEscapeShortBits = 2;
inline constexpr int kEscapeLongBits = 15;
inline constexpr int32_t kMaxEscapeExtra = (1 << kEscapeLongBits) - 1;
inline constexpr int kCubeSize = 16;
inline constexpr int kSigmaLevels = 3968;  // I_sigma table range [0, 3967]
inline constexpr int32_t kSigmaNeutral = 1411;

// Quantized symbol frequencies. Row r holds `alphabet` slot counts; slot s
// stands for the signed value s - bound[r]. Only a prefix of the slots is
// active (count >= 1); the rest are zero. The active length n is 2b or
// 2b+1 for bound b, the counts sum to 2^table_log, and slot 0 (value -b)
// is the escape marker.
struct CdfTable {
  int rows = 0;
  int alphabet = 0;
  std::vector<uint16_t> counts;  // rows * alphabet
  std::vector<uint16_t> bounds;  // rows

  std::span<const uint16_t> row(int r) const {
    return std::span<const uint16_t>(counts).subspan(static_cast<std::size_t>(r) * alphabet, alphabet);
  }
  int active(int r) const;
  // Cumulative count at slot `s` of row `r` (sum of counts before s).
  int cumulative(int r, int s) const;
  // Throws Error when any of the invariants above is violated.
  void validate() const;
};

// Counts for one row: the zero-mean Gaussian with std-dev `sigma`, binned to
// integers in [-bound, bound] with both tails folded onto the escape slot,
// floor of one per slot and largest-remainder rounding to 2^table_log.
std::vector<uint16_t> gaussian_row_counts(double sigma, int bound);
// Expected bits per sample of coding a Gaussian with this row, including the
// escape payload bits.
double expected_row_cost(double sigma, int bound);
// Bound used for `sigma`: the cost minimiser, raised until the escape slot
// reaches the floor count, capped at max_bound.
int choose_bound(double sigma, int max_bound);

std::vector<double> residual_sigma_bins();  // 32 log-spaced values
std::vector<double> hyper_sigma_bins();     // 128 log-spaced values

CdfTable build_gaussian_cdf(std::span<const double> sigma_bins, int alphabet, int max_bound);
CdfTable default_residual_cdf();
CdfTable default_hyper_cdf();

// Shannon entropy in bits of a count row normalised to 2^table_log.
double row_entropy(std::span<const uint16_t> counts);

struct DecodeEntry {
  int16_t symbol;  // signed value (slot - bound)
  uint8_t nbits;
  uint8_t next;    // (x << nbits) - 2^table_log; next state is next | bits
};

struct TansRow {
  std::array<DecodeEntry, kStates> decode{};
  std::array<uint16_t, kStates> encode{};  // indexed by cumulative + rank
  std::vector<uint16_t> counts;
  std::vector<uint16_t> cumulative;
  int bound = 0;
  int active = 0;
};

struct TansTables {
  std::vector<TansRow> rows;
  int alphabet = 0;
};

TansTables build_tans_tables(const CdfTable& cdf);

// Maps I_sigma to a residual CDF row through the bin edges. edge[k] is the
// lowest I_sigma that selects row k (edge[0] is informational).
class SigmaQuantizer {
 public:
  SigmaQuantizer();  // default edges
  explicit SigmaQuantizer(std::span<const int32_t> edges);

  int row(int32_t sigma) const {
    const int32_t clamped = sigma < 0 ? 0 : (sigma >= kSigmaLevels ? kSigmaLevels - 1 : sigma);
    return lut_[static_cast<std::size_t>(clamped)];
  }
  const std::array<int32_t, kResidualRows>& edges() const { return edges_; }

 private:
  std::array<int32_t, kResidualRows> edges_{};
  std::array<uint8_t, kSigmaLevels> lut_{};
};

std::array<int32_t, kResidualRows> default_sigma_edges();
// Skip threshold per skip_threshold_idx. Index 0 disables skipping.
std::array<int32_t, 8> default_skip_ladder();

// One flag per 16x16x16 cube of a (C, H, W) plane, packed LSB first in
// channel-major cube order. A set flag forces coding of every position in
// the cube regardless of the skip threshold.
class CubeFlags {
 public:
  CubeFlags() = default;
  explicit CubeFlags(const Shape3& plane);

  bool get(int c, int i, int j) const { return flags_[cube_index(c, i, j)] != 0; }
  void set(int c, int i, int j, bool value = true) { flags_[cube_index(c, i, j)] = value ? 1 : 0; }
  std::size_t cube_index(int c, int i, int j) const {
    return (static_cast<std::size_t>(c / kCubeSize) * cubes_h_ + static_cast<std::size_t>(i / kCubeSize)) *
               cubes_w_ +
           static_cast<std::size_t>(j / kCubeSize);
  }
  std::size_t cube_count() const { return flags_.size(); }
  std::size_t set_count() const;
  bool flag_at(std::size_t cube) const { return flags_[cube] != 0; }
  void set_at(std::size_t cube, bool value) { flags_[cube] = value ? 1 : 0; }

  std::size_t byte_size() const { return (flags_.size() + 7) / 8; }
  std::vector<uint8_t> serialize() const;
  // Reads byte_size() bytes from the front of `bytes`; padding bits must be 0.
  static CubeFlags parse(const Shape3& plane, std::span<const uint8_t> bytes, std::size_t base_offset = 0);

  bool operator==(const CubeFlags&) const = default;

 private:
  int cubes_h_ = 0;
  int cubes_w_ = 0;
  std::vector<uint8_t> flags_;
};

// Everything needed to decide, per position, which CDF row codes it or
// whether it is skipped.
struct ResidualModel {
  const TansTables* tables = nullptr;
  const SigmaQuantizer* quantizer = nullptr;
  int32_t skip_threshold = INT32_MIN;
  const CubeFlags* cubes = nullptr;  // may be null: no overrides

  bool skipped(int32_t sigma, int c, int i, int j) const {
    return sigma < skip_threshold && !(cubes != nullptr && cubes->get(c, i, j));
  }
};

struct DecodeStats {
  uint64_t bits_read = 0;
  uint64_t symbols_decoded = 0;
  uint64_t positions_skipped = 0;
  uint64_t escapes = 0;
  // Optional per-position bit attribution (same layout as the plane).
  // Escape bits and the state refill of a symbol count towards its position;
  // the initial state reads are not attributed.
  std::vector<uint32_t>* position_bits = nullptr;

  void merge(const DecodeStats& other) {
    bits_read += other.bits_read;
    symbols_decoded += other.symbols_decoded;
    positions_skipped += other.positions_skipped;
    escapes += other.escapes;
  }
};

// Codes rows [row_begin, row_end) of every channel. Symbols are taken in
// channel-major order (c, i, j). Throws Error on a non-zero residual at a
// skipped position or a magnitude beyond the escape range.
std::vector<uint8_t> tans_encode_plane(const PlaneTensor& residual, const PlaneTensor& sigma,
                                       const ResidualModel& model, int row_begin = 0, int row_end = -1);
// Inverse of tans_encode_plane: fills rows [row_begin, row_end) of `out`.
void tans_decode_rows(std::span<const uint8_t> bytes, const PlaneTensor& sigma, const ResidualModel& model,
                      PlaneTensor& out, int row_begin, int row_end, DecodeStats* stats = nullptr);
PlaneTensor tans_decode_plane(std::span<const uint8_t> bytes, const PlaneTensor& sigma, const ResidualModel& model,
                              DecodeStats* stats = nullptr);

// Hyper tensors: row = channel mod 128, no skipping.
std::vector<uint8_t> encode_hyper(const PlaneTensor& z, const TansTables& tables);
PlaneTensor decode_hyper(std::span<const uint8_t> bytes, int channels, int height, int width,
                         const TansTables& tables, DecodeStats* stats = nullptr);
int hyper_row(int channel);

// Row band k of `count` covers [b[k], b[k+1]) with b[k] = floor(k*H/count).
std::vector<int> band_rows(int height, int count);

struct SubstreamLayout {
  int count = 0;
  std::vector<uint32_t> offsets;  // from the block start
};

// Block = count little-endian u32 offsets followed by the parts. Parts may
// be empty, so offsets are non-decreasing.
std::vector<uint8_t> join_substreams(std::span<const std::vector<uint8_t>> parts);
SubstreamLayout read_substream_layout(std::span<const uint8_t> block, int count, std::size_t base_offset = 0);
std::vector<std::span<const uint8_t>> split_substreams(std::span<const uint8_t> block, int count,
                                                       std::size_t base_offset = 0);

// Codes a residual plane as `count` row-band substreams.
std::vector<uint8_t> encode_residual_block(const PlaneTensor& residual, const PlaneTensor& sigma,
                                           const ResidualModel& model, int count);
// Decodes the first `keep` substreams (all when keep < 0); the other bands
// are left at zero. Parallel mode decodes substreams concurrently.
PlaneTensor decode_residual_block(std::span<const uint8_t> block, const PlaneTensor& sigma,
                                  const ResidualModel& model, int count, int keep = -1,
                                  Exec exec = Exec::kParallel, DecodeStats* stats = nullptr,
                                  std::size_t base_offset = 0);

}  // namespace jpegai
