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
#include <optional>
#include <span>
#include <vector>

#include "jpegai/entropy.hpp"
#include "jpegai/exec.hpp"
#include "jpegai/tensor.hpp"

namespace jpegai {

inline constexpr int kModelCount = 4;
inline constexpr int kRvsIds = 4;
inline constexpr int kPoolSize = 8;
// Latent samples carry 4 fractional bits; coded residuals are integers.
inline constexpr int kLatentFracBits = 4;
inline constexpr int32_t kMLogMin = -1984;
inline constexpr int32_t kMLogMax = 1983;
inline constexpr int kMLogLevels = kMLogMax - kMLogMin + 1;
inline constexpr int kDefaultStep = 64;
inline constexpr int kDefaultSigmaPrecision = 12;

// T1/T2 indexed [modelID][id][pooled sigma]. T2 is a 16.16 multiplier.
struct RvsTables {
  std::vector<int32_t> t1;
  std::vector<int32_t> t2;

  static std::size_t at(int model, int id, int sigma) {
    return (static_cast<std::size_t>(model) * kRvsIds + static_cast<std::size_t>(id)) * kSigmaLevels +
           static_cast<std::size_t>(sigma);
  }
  int32_t T1(int model, int id, int sigma) const { return t1[at(model, id, sigma)]; }
  int32_t T2(int model, int id, int sigma) const { return t2[at(model, id, sigma)]; }
};

// TP/TR indexed [modelID][pooled sigma], 13-bit fractional.
struct LsbsTables {
  std::vector<int32_t> tp;
  std::vector<int32_t> tr;

  static std::size_t at(int model, int sigma) {
    return static_cast<std::size_t>(model) * kSigmaLevels + static_cast<std::size_t>(sigma);
  }
  int32_t TP(int model, int sigma) const { return tp[at(model, sigma)]; }
  int32_t TR(int model, int sigma) const { return tr[at(model, sigma)]; }
};

// Closed forms used to generate the default tables. The loader and the
// on-the-fly path must agree entry for entry.
int32_t rvs_t1_formula(int model, int id, int sigma);
int32_t rvs_t2_formula(int model, int id, int sigma);
int32_t lsbs_tp_formula(int model, int sigma);
int32_t lsbs_tr_formula(int model, int sigma);
RvsTables generate_rvs_tables();
LsbsTables generate_lsbs_tables();

// m_inv = mant * 2^-shift with mant normalised to [2^62, 2^63).
struct MInv {
  uint64_t mant = uint64_t{1} << 62;
  int16_t shift = 62;
  bool operator==(const MInv&) const = default;
};

struct GainTables {
  // m_ref[model][comp] has 160 (comp 0) or 96 (comp 1) entries.
  std::array<std::array<std::vector<int16_t>, 2>, kModelCount> m_ref;
  int32_t step = kDefaultStep;
  int32_t sigma_precision = kDefaultSigmaPrecision;
  std::vector<MInv> m_inv;  // indexed by m_log - kMLogMin

  const MInv& inv(int32_t m_log) const {
    const int32_t clamped = m_log < kMLogMin ? kMLogMin : (m_log > kMLogMax ? kMLogMax : m_log);
    return m_inv[static_cast<std::size_t>(clamped - kMLogMin)];
  }
};

// Lookup realisation of exp(-m_log * step / 2^sigmaPrecision).
std::vector<MInv> build_m_inv_lut(int32_t step, int32_t sigma_precision);
// Reference m_ref: coarse-to-fine quantiser steps per model and band.
std::array<std::array<std::vector<int16_t>, 2>, kModelCount> default_m_ref();
GainTables generate_gain_tables(int32_t step = kDefaultStep, int32_t sigma_precision = kDefaultSigmaPrecision);

// x * m_inv rounded half away from zero, saturated to int32.
int32_t mul_m_inv(int32_t x, const MInv& m);
double m_inv_value(const MInv& m);

struct GainState {
  int model_id = 0;
  std::array<int32_t, 2> beta{};
  std::optional<PlaneTensor> gain3d;  // 1 x h x w at luma latent resolution
  std::array<PlaneTensor, 2> m_log;   // per component, clamped to the LUT range
  const GainTables* tables = nullptr;

  bool identity() const;
};

// Component planes: comp 0 has shape `primary`, comp 1 `secondary`. The
// chroma latent at (i, j) reads Gain3d at (i * cv, j * ch), clamped.
GainState build_gain_state(int model_id, std::array<int32_t, 2> beta, const std::optional<PlaneTensor>& gain3d,
                           const GainTables& tables, const Shape3& primary, const Shape3& secondary, int cv = 1,
                           int ch = 1);

// I_sigma += m_log.
void apply_gain_sigma(PlaneTensor& sigma, const GainState& gain, int comp, Exec exec = Exec::kParallel);
// r (latent units) *= m_inv.
void apply_gain_residual(PlaneTensor& residual, const GainState& gain, int comp, Exec exec = Exec::kParallel);
void apply_gain_decode(PlaneTensor& residual, PlaneTensor& sigma, const GainState& gain, int comp,
                       Exec exec = Exec::kParallel);

// Coded integer residual to latent units.
PlaneTensor to_latent_units(const PlaneTensor& coded);

// 8x8 mean with +32 bias and >> 6; taps outside the plane read 1411.
// Output is C x ceil(H/8) x ceil(W/8), clamped to [0, 3967].
PlaneTensor average_variance(const PlaneTensor& sigma, Exec exec = Exec::kParallel);

// Per-channel RVS selector id = GRFS[c] + 2 * rvs_enable_flag.
std::vector<int> rvs_ids(int channels, std::span<const uint8_t> grfs, bool grfs_enable, bool rvs_enable);

void rvs_apply_sigma(PlaneTensor& sigma, const PlaneTensor& pooled, const RvsTables& tables, int model,
                     std::span<const int> ids, Exec exec = Exec::kParallel);
// r = (r * T2) / 2^16, truncating toward zero.
void rvs_apply_residual(PlaneTensor& residual, const PlaneTensor& pooled, const RvsTables& tables, int model,
                        std::span<const int> ids, Exec exec = Exec::kParallel);

// y += (r * TR + (y - r) * TP + 2^12) >> 13.
PlaneTensor lsbs_apply(const PlaneTensor& y, const PlaneTensor& residual, const PlaneTensor& pooled,
                       const LsbsTables& tables, int model, Exec exec = Exec::kParallel);

// Quality map: varint height, varint width, then the samples coded with the
// hyper tables as a single channel.
std::vector<uint8_t> encode_quality_map(const PlaneTensor& map, const TansTables& hyper);
PlaneTensor decode_quality_map(std::span<const uint8_t> payload, int expected_height, int expected_width,
                               const TansTables& hyper, std::size_t base_offset = 0);

}  // namespace jpegai
