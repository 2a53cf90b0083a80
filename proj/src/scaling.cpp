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

#include "jpegai/scaling.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "jpegai/container.hpp"
#include "jpegai/error.hpp"

namespace jpegai {
namespace {

constexpr int kRvsAlpha[kRvsIds] = {0, 2, 4, 6};

// Quantiser step per model in transform-coefficient units, and the band
// weights applied on top of it.
constexpr double kModelStep[kModelCount] = {16.0, 8.0, 4.0, 2.0};
constexpr double kChromaStepScale = 1.5;

int32_t saturate32(__int128 v) {
  if (v > std::numeric_limits<int32_t>::max()) return std::numeric_limits<int32_t>::max();
  if (v < std::numeric_limits<int32_t>::min()) return std::numeric_limits<int32_t>::min();
  return static_cast<int32_t>(v);
}

int32_t clamp_sigma(int32_t v) { return v < 0 ? 0 : (v >= kSigmaLevels ? kSigmaLevels - 1 : v); }

// Decomposition level (1 finest .. 4 coarsest, 5 for LL) of each latent
// channel, matching the coefficient order of the toy transform.
int luma_channel_level(int c) {
  if (c == 0) return 5;
  if (c < 4) return 4;
  if (c < 16) return 3;
  if (c < 64) return 2;
  return 1;
}

int chroma_channel_level(int c) { return luma_channel_level(c % 48); }

double band_weight(int level) {
  if (level >= 3) return 1.0;
  return level == 2 ? 1.5 : 2.0;
}

void check_pooled(const PlaneTensor& plane, const PlaneTensor& pooled) {
  if (pooled.channels() != plane.channels() || pooled.height() != ceil_div(plane.height(), kPoolSize) ||
      pooled.width() != ceil_div(plane.width(), kPoolSize)) {
    throw Error("pooled variance does not match plane " + plane.shape().str());
  }
}

}  // namespace

int32_t rvs_t2_formula(int model, int id, int sigma) {
  const int32_t d = sigma - kSigmaNeutral;
  return 65536 + ((kRvsAlpha[id] * (model + 1) * d) >> 4);
}

int32_t rvs_t1_formula(int model, int id, int sigma) {
  return -(((rvs_t2_formula(model, id, sigma) - 65536) * 64) >> 16);
}

int32_t lsbs_tr_formula(int model, int sigma) { return ((model + 1) * (sigma - kSigmaNeutral)) >> 1; }

int32_t lsbs_tp_formula(int model, int sigma) { return -(((model + 1) * (sigma - kSigmaNeutral)) >> 3); }

RvsTables generate_rvs_tables() {
  RvsTables t;
  t.t1.resize(static_cast<std::size_t>(kModelCount) * kRvsIds * kSigmaLevels);
  t.t2.resize(t.t1.size());
  for (int m = 0; m < kModelCount; ++m) {
    for (int id = 0; id < kRvsIds; ++id) {
      for (int s = 0; s < kSigmaLevels; ++s) {
        t.t1[RvsTables::at(m, id, s)] = rvs_t1_formula(m, id, s);
        t.t2[RvsTables::at(m, id, s)] = rvs_t2_formula(m, id, s);
      }
    }
  }
  return t;
}

LsbsTables generate_lsbs_tables() {
  LsbsTables t;
  t.tp.resize(static_cast<std::size_t>(kModelCount) * kSigmaLevels);
  t.tr.resize(t.tp.size());
  for (int m = 0; m < kModelCount; ++m) {
    for (int s = 0; s < kSigmaLevels; ++s) {
      t.tp[LsbsTables::at(m, s)] = lsbs_tp_formula(m, s);
      t.tr[LsbsTables::at(m, s)] = lsbs_tr_formula(m, s);
    }
  }
  return t;
}

std::vector<MInv> build_m_inv_lut(int32_t step, int32_t sigma_precision) {
  if (step <= 0 || sigma_precision < 0 || sigma_precision > 30) throw Error("gain: bad step or sigmaPrecision");
  std::vector<MInv> lut(kMLogLevels);
  const long double scale = std::ldexp(static_cast<long double>(step), -sigma_precision);
  for (int k = 0; k < kMLogLevels; ++k) {
    const long double e = -static_cast<long double>(kMLogMin + k) * scale;
    if (std::fabs(e) > 80.0L) throw Error("gain: m_inv exponent out of range; reduce step");
    int exponent = 0;
    const long double f = std::frexp(std::exp(e), &exponent);  // f in [0.5, 1)
    auto mant = static_cast<uint64_t>(std::round(std::ldexp(f, 63)));
    if (mant == (uint64_t{1} << 63)) {
      mant >>= 1;
      ++exponent;
    }
    lut[k] = MInv{mant, static_cast<int16_t>(63 - exponent)};
  }
  return lut;
}

std::array<std::array<std::vector<int16_t>, 2>, kModelCount> default_m_ref() {
  std::array<std::array<std::vector<int16_t>, 2>, kModelCount> m_ref;
  for (int m = 0; m < kModelCount; ++m) {
    m_ref[m][0].resize(160);
    m_ref[m][1].resize(96);
    for (int c = 0; c < 160; ++c) {
      const double step = kModelStep[m] * band_weight(luma_channel_level(c));
      m_ref[m][0][c] = static_cast<int16_t>(-std::lround(64.0 * std::log(step)));
    }
    for (int c = 0; c < 96; ++c) {
      const double step = kModelStep[m] * kChromaStepScale * band_weight(chroma_channel_level(c));
      m_ref[m][1][c] = static_cast<int16_t>(-std::lround(64.0 * std::log(step)));
    }
  }
  return m_ref;
}

GainTables generate_gain_tables(int32_t step, int32_t sigma_precision) {
  GainTables t;
  t.m_ref = default_m_ref();
  t.step = step;
  t.sigma_precision = sigma_precision;
  t.m_inv = build_m_inv_lut(step, sigma_precision);
  return t;
}

int32_t mul_m_inv(int32_t x, const MInv& m) {
  const __int128 magnitude = static_cast<__int128>(x < 0 ? -static_cast<int64_t>(x) : x) * m.mant;
  // magnitude < 2^94, so any shift above 95 rounds to zero and any
  // non-positive shift saturates.
  __int128 r;
  if (m.shift > 95) {
    r = 0;
  } else if (m.shift > 0) {
    r = (magnitude + (static_cast<__int128>(1) << (m.shift - 1))) >> m.shift;
  } else {
    r = magnitude != 0 ? static_cast<__int128>(1) << 64 : 0;
  }
  return saturate32(x < 0 ? -r : r);
}

double m_inv_value(const MInv& m) { return std::ldexp(static_cast<double>(m.mant), -m.shift); }

bool GainState::identity() const {
  for (const auto& plane : m_log) {
    for (int32_t v : plane.data()) {
      if (v != 0) return false;
    }
  }
  return true;
}

GainState build_gain_state(int model_id, std::array<int32_t, 2> beta, const std::optional<PlaneTensor>& gain3d,
                           const GainTables& tables, const Shape3& primary, const Shape3& secondary, int cv,
                           int ch) {
  if (model_id < 0 || model_id >= kModelCount) throw Error("gain: modelID out of range");
  if (gain3d && (gain3d->channels() != 1 || gain3d->height() != primary.height ||
                 gain3d->width() != primary.width)) {
    throw Error("gain: Gain3d map " + gain3d->shape().str() + " does not match the latent grid " + primary.str());
  }
  GainState g;
  g.model_id = model_id;
  g.beta = beta;
  g.gain3d = gain3d;
  g.tables = &tables;
  const Shape3 shapes[2] = {primary, secondary};
  const int fv[2] = {1, cv};
  const int fh[2] = {1, ch};
  for (int comp = 0; comp < 2; ++comp) {
    const Shape3& s = shapes[comp];
    const auto& m_ref = tables.m_ref[model_id][comp];
    if (static_cast<int>(m_ref.size()) < s.channels) throw Error("gain: m_ref has too few channels");
    PlaneTensor& plane = g.m_log[comp];
    plane = PlaneTensor(s);
    for (int c = 0; c < s.channels; ++c) {
      for (int i = 0; i < s.height; ++i) {
        for (int j = 0; j < s.width; ++j) {
          int64_t v = static_cast<int64_t>(beta[comp]) + m_ref[c];
          if (gain3d && primary.height > 0 && primary.width > 0) {
            const int gi = std::min(i * fv[comp], primary.height - 1);
            const int gj = std::min(j * fh[comp], primary.width - 1);
            v += (*gain3d)(0, gi, gj);
          }
          plane(c, i, j) = static_cast<int32_t>(std::clamp<int64_t>(v, kMLogMin, kMLogMax));
        }
      }
    }
  }
  return g;
}

void apply_gain_sigma(PlaneTensor& sigma, const GainState& gain, int comp, Exec exec) {
  require_same_shape(sigma.shape(), gain.m_log[comp].shape(), "apply_gain_sigma");
  auto s = sigma.data();
  const auto m = gain.m_log[comp].data();
  const auto n = static_cast<int64_t>(s.size());
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int64_t k = 0; k < n; ++k) s[k] += m[k];
}

void apply_gain_residual(PlaneTensor& residual, const GainState& gain, int comp, Exec exec) {
  require_same_shape(residual.shape(), gain.m_log[comp].shape(), "apply_gain_residual");
  auto r = residual.data();
  const auto m = gain.m_log[comp].data();
  const GainTables& t = *gain.tables;
  const auto n = static_cast<int64_t>(r.size());
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int64_t k = 0; k < n; ++k) r[k] = mul_m_inv(r[k], t.inv(m[k]));
}

void apply_gain_decode(PlaneTensor& residual, PlaneTensor& sigma, const GainState& gain, int comp, Exec exec) {
  apply_gain_residual(residual, gain, comp, exec);
  apply_gain_sigma(sigma, gain, comp, exec);
}

PlaneTensor to_latent_units(const PlaneTensor& coded) {
  PlaneTensor out(coded.shape());
  auto o = out.data();
  const auto in = coded.data();
  for (std::size_t k = 0; k < in.size(); ++k) o[k] = in[k] * (1 << kLatentFracBits);
  return out;
}

PlaneTensor average_variance(const PlaneTensor& sigma, Exec exec) {
  const int H = sigma.height();
  const int W = sigma.width();
  const int ph = ceil_div(H, kPoolSize);
  const int pw = ceil_div(W, kPoolSize);
  PlaneTensor pooled(sigma.channels(), ph, pw);
  const int C = sigma.channels();
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int c = 0; c < C; ++c) {
    for (int pi = 0; pi < ph; ++pi) {
      for (int pj = 0; pj < pw; ++pj) {
        int64_t sum = 32;
        int valid = 0;
        for (int di = 0; di < kPoolSize; ++di) {
          const int i = pi * kPoolSize + di;
          if (i >= H) break;
          for (int dj = 0; dj < kPoolSize; ++dj) {
            const int j = pj * kPoolSize + dj;
            if (j >= W) break;
            sum += sigma(c, i, j);
            ++valid;
          }
        }
        sum += static_cast<int64_t>(kPoolSize * kPoolSize - valid) * kSigmaNeutral;
        pooled(c, pi, pj) = clamp_sigma(static_cast<int32_t>(sum >> 6));
      }
    }
  }
  return pooled;
}

std::vector<int> rvs_ids(int channels, std::span<const uint8_t> grfs, bool grfs_enable, bool rvs_enable) {
  if (grfs_enable && static_cast<int>(grfs.size()) < channels) throw Error("RVS: too few GRFS flags");
  std::vector<int> ids(channels);
  for (int c = 0; c < channels; ++c) ids[c] = (grfs_enable ? (grfs[c] & 1) : 0) + 2 * (rvs_enable ? 1 : 0);
  return ids;
}

void rvs_apply_sigma(PlaneTensor& sigma, const PlaneTensor& pooled, const RvsTables& tables, int model,
                     std::span<const int> ids, Exec exec) {
  check_pooled(sigma, pooled);
  const int C = sigma.channels();
  const int H = sigma.height();
  const int W = sigma.width();
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        sigma(c, i, j) += tables.T1(model, ids[c], pooled(c, i / kPoolSize, j / kPoolSize));
      }
    }
  }
}

void rvs_apply_residual(PlaneTensor& residual, const PlaneTensor& pooled, const RvsTables& tables, int model,
                        std::span<const int> ids, Exec exec) {
  check_pooled(residual, pooled);
  const int C = residual.channels();
  const int H = residual.height();
  const int W = residual.width();
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        const int64_t t2 = tables.T2(model, ids[c], pooled(c, i / kPoolSize, j / kPoolSize));
        residual(c, i, j) = saturate32(static_cast<int64_t>(residual(c, i, j)) * t2 / 65536);
      }
    }
  }
}

PlaneTensor lsbs_apply(const PlaneTensor& y, const PlaneTensor& residual, const PlaneTensor& pooled,
                       const LsbsTables& tables, int model, Exec exec) {
  require_same_shape(y.shape(), residual.shape(), "lsbs_apply");
  check_pooled(y, pooled);
  PlaneTensor out(y.shape());
  const int C = y.channels();
  const int H = y.height();
  const int W = y.width();
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        const int s = pooled(c, i / kPoolSize, j / kPoolSize);
        const int64_t r = residual(c, i, j);
        const int64_t mu = static_cast<int64_t>(y(c, i, j)) - r;
        const int64_t delta = (r * tables.TR(model, s) + mu * tables.TP(model, s) + 4096) >> 13;
        out(c, i, j) = saturate32(y(c, i, j) + delta);
      }
    }
  }
  return out;
}

std::vector<uint8_t> encode_quality_map(const PlaneTensor& map, const TansTables& hyper) {
  if (map.channels() != 1) throw Error("quality map must have one channel");
  std::vector<uint8_t> out;
  append_varint(out, static_cast<uint64_t>(map.height()));
  append_varint(out, static_cast<uint64_t>(map.width()));
  const auto body = encode_hyper(map, hyper);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

PlaneTensor decode_quality_map(std::span<const uint8_t> payload, int expected_height, int expected_width,
                               const TansTables& hyper, std::size_t base_offset) {
  std::size_t pos = 0;
  const uint32_t h = decode_varint(payload, pos, base_offset);
  const uint32_t w = decode_varint(payload, pos, base_offset);
  if (h != static_cast<uint32_t>(expected_height) || w != static_cast<uint32_t>(expected_width)) {
    throw FormatError("quality map is " + std::to_string(h) + "x" + std::to_string(w) + ", expected " +
                          std::to_string(expected_height) + "x" + std::to_string(expected_width),
                      base_offset);
  }
  try {
    return decode_hyper(payload.subspan(pos), 1, static_cast<int>(h), static_cast<int>(w), hyper);
  } catch (const FormatError& e) {
    throw FormatError(std::string("quality map: ") + e.what(), base_offset + pos);
  }
}

}  // namespace jpegai
