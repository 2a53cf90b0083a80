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

#include "jpegai/transform.hpp"

#include <algorithm>
#include <vector>

#include "jpegai/error.hpp"
#include "jpegai/scaling.hpp"

namespace jpegai {

namespace {
// Keeps the lifting steps inside int32 for any latent input.
constexpr int64_t kMaxSynthesisCoefficient = int64_t{1} << 24;
}  // namespace
namespace {

constexpr int kLevels = 4;

// Offset of band (level, orientation) inside BlockCoefficients.
// orientation: 0 HL, 1 LH, 2 HH. Level 4 also has LL at offset 0.
int band_offset(int level, int orientation) {
  // Sizes: level 4 bands 1, level 3 bands 4, level 2 bands 16, level 1 bands 64.
  static constexpr int kStart[kLevels + 1] = {0, 64, 16, 4, 1};
  const int size = 1 << (2 * (kLevels - level));
  return kStart[level] + orientation * size;
}

int band_width(int level) { return kLatentStride >> level; }

struct Work {
  int32_t v[kLatentStride][kLatentStride];
};

void forward_level(Work& w, int rows, int cols, int level, BlockCoefficients& out) {
  if (rows & 1) {
    for (int j = 0; j < cols; ++j) w.v[rows][j] = w.v[rows - 1][j];
    ++rows;
  }
  if (cols & 1) {
    for (int i = 0; i < rows; ++i) w.v[i][cols] = w.v[i][cols - 1];
    ++cols;
  }
  const int hr = rows / 2;
  const int hc = cols / 2;
  int32_t lo[kLatentStride][kLatentStride / 2];
  int32_t hi[kLatentStride][kLatentStride / 2];
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < hc; ++k) {
      const int32_t a = w.v[i][2 * k];
      const int32_t b = w.v[i][2 * k + 1];
      hi[i][k] = a - b;
      lo[i][k] = b + ((a - b) >> 1);
    }
  }
  const int bw = band_width(level);
  for (int k = 0; k < hr; ++k) {
    for (int j = 0; j < hc; ++j) {
      const int32_t la = lo[2 * k][j], lb = lo[2 * k + 1][j];
      const int32_t ha = hi[2 * k][j], hb = hi[2 * k + 1][j];
      w.v[k][j] = lb + ((la - lb) >> 1);                  // LL, input of the next level
      out[band_offset(level, 1) + k * bw + j] = la - lb;  // LH
      out[band_offset(level, 0) + k * bw + j] = hb + ((ha - hb) >> 1);  // HL
      out[band_offset(level, 2) + k * bw + j] = ha - hb;  // HH
    }
  }
}

void inverse_level(Work& w, int rows, int cols, int level, const BlockCoefficients& in) {
  const int pr = rows + (rows & 1);
  const int pc = cols + (cols & 1);
  const int hr = pr / 2;
  const int hc = pc / 2;
  const int bw = band_width(level);
  int32_t lo[kLatentStride][kLatentStride / 2];
  int32_t hi[kLatentStride][kLatentStride / 2];
  for (int k = 0; k < hr; ++k) {
    for (int j = 0; j < hc; ++j) {
      const int32_t ll = w.v[k][j];
      const int32_t lh = in[band_offset(level, 1) + k * bw + j];
      const int32_t hl = in[band_offset(level, 0) + k * bw + j];
      const int32_t hh = in[band_offset(level, 2) + k * bw + j];
      const int32_t lb = ll - (lh >> 1);
      lo[2 * k][j] = lh + lb;
      lo[2 * k + 1][j] = lb;
      const int32_t hb = hl - (hh >> 1);
      hi[2 * k][j] = hh + hb;
      hi[2 * k + 1][j] = hb;
    }
  }
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < hc; ++k) {
      const int32_t b = lo[i][k] - (hi[i][k] >> 1);
      const int32_t a = hi[i][k] + b;
      if (2 * k < cols) w.v[i][2 * k] = a;
      if (2 * k + 1 < cols) w.v[i][2 * k + 1] = b;
    }
  }
}

// Input sizes of each level for a block of rows x cols.
std::array<std::pair<int, int>, kLevels> level_sizes(int rows, int cols) {
  std::array<std::pair<int, int>, kLevels> sizes{};
  for (int l = 0; l < kLevels; ++l) {
    sizes[l] = {rows, cols};
    rows = (rows + 1) / 2;
    cols = (cols + 1) / 2;
  }
  return sizes;
}

}  // namespace

BlockCoefficients haar_block_forward(const int32_t* samples, int rows, int cols, std::ptrdiff_t stride) {
  if (rows < 1 || cols < 1 || rows > kLatentStride || cols > kLatentStride) throw Error("haar block size out of range");
  BlockCoefficients out{};
  Work w{};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w.v[i][j] = samples[i * stride + j];
  }
  const auto sizes = level_sizes(rows, cols);
  for (int l = 0; l < kLevels; ++l) forward_level(w, sizes[l].first, sizes[l].second, l + 1, out);
  out[0] = w.v[0][0];
  return out;
}

void haar_block_inverse(const BlockCoefficients& in, int rows, int cols, int32_t* samples, std::ptrdiff_t stride) {
  if (rows < 1 || cols < 1 || rows > kLatentStride || cols > kLatentStride) throw Error("haar block size out of range");
  Work w{};
  w.v[0][0] = in[0];
  const auto sizes = level_sizes(rows, cols);
  for (int l = kLevels; l-- > 0;) inverse_level(w, sizes[l].first, sizes[l].second, l + 1, in);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) samples[i * stride + j] = w.v[i][j];
  }
}

int luma_coefficient_index(int c) {
  if (c < 0 || c >= kLumaChannels) throw Error("luma channel out of range");
  if (c < 128) return c;
  const int k = c - 128;  // LH1 rows 0, 2, 4, 6
  return band_offset(1, 1) + (2 * (k / 8)) * 8 + k % 8;
}

int chroma_coefficient_index(int c) {
  if (c < 0 || c >= kChromaPlaneChannels) throw Error("chroma channel out of range");
  return c;
}

TransformPair transform_for_decoder(int decoder_id) {
  switch (decoder_id) {
    case 0:
      return {"toy-haar", 4, 4};
    case 1:
      return {"toy-haar", 8, 8};
    case 2:
      return {"toy-haar", 0, 0};
    default:
      throw Error("unknown decoder ID " + std::to_string(decoder_id));
  }
}

TransformPair transform_by_name(const std::string& name) {
  if (name == "toy-haar") return {"toy-haar", 0, 0};
  throw Error("unknown transform '" + name + "'");
}

PlaneTensor analysis(const PlaneTensor& samples, int bitdepth, int per_plane, Exec exec) {
  if (per_plane != kLumaChannels && per_plane != kChromaPlaneChannels) throw Error("analysis: bad channel count");
  const int P = samples.channels();
  const int H = samples.height();
  const int W = samples.width();
  const int lh = ceil_div(H, kLatentStride);
  const int lw = ceil_div(W, kLatentStride);
  const int32_t mid = 1 << (bitdepth - 1);
  PlaneTensor latent(P * per_plane, lh, lw);
  const int blocks = P * lh * lw;
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int b = 0; b < blocks; ++b) {
    const int p = b / (lh * lw);
    const int bi = (b / lw) % lh;
    const int bj = b % lw;
    const int rows = std::min(kLatentStride, H - bi * kLatentStride);
    const int cols = std::min(kLatentStride, W - bj * kLatentStride);
    int32_t block[kLatentStride * kLatentStride];
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        block[i * kLatentStride + j] = samples(p, bi * kLatentStride + i, bj * kLatentStride + j) - mid;
      }
    }
    const BlockCoefficients coef = haar_block_forward(block, rows, cols, kLatentStride);
    for (int c = 0; c < per_plane; ++c) {
      const int k = per_plane == kLumaChannels ? luma_coefficient_index(c) : chroma_coefficient_index(c);
      latent(p * per_plane + c, bi, bj) = coef[k] * (1 << kLatentFracBits);
    }
  }
  return latent;
}

PlaneTensor synthesis(const PlaneTensor& latent, int planes, int height, int width, int bitdepth, int tile_h,
                      int tile_w, Exec exec) {
  if (planes < 1 || latent.channels() % planes != 0) throw Error("synthesis: channel count not divisible by planes");
  const int per_plane = latent.channels() / planes;
  if (per_plane != kLumaChannels && per_plane != kChromaPlaneChannels) throw Error("synthesis: bad channel count");
  const int lh = latent.height();
  const int lw = latent.width();
  if (lh != ceil_div(height, kLatentStride) || lw != ceil_div(width, kLatentStride)) {
    throw Error("synthesis: latent grid does not match the picture size");
  }
  if (tile_h <= 0 || tile_w <= 0) {
    tile_h = std::max(lh, 1);
    tile_w = std::max(lw, 1);
  }
  const int32_t mid = 1 << (bitdepth - 1);
  const int32_t peak = (1 << bitdepth) - 1;
  PlaneTensor out(planes, height, width);
  const int tiles_v = ceil_div(lh, tile_h);
  const int tiles_h = ceil_div(lw, tile_w);
  const int tiles = tiles_v * tiles_h;
  // Each tile only reads its own latent samples and writes its own pixels.
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::kParallel)
  for (int t = 0; t < tiles; ++t) {
    const Rect rect{(t / tiles_h) * tile_h, (t % tiles_h) * tile_w, std::min(tile_h, lh - (t / tiles_h) * tile_h),
                    std::min(tile_w, lw - (t % tiles_h) * tile_w)};
    const PlaneTensor tile = extract(latent, rect);
    for (int p = 0; p < planes; ++p) {
      for (int bi = 0; bi < rect.height; ++bi) {
        for (int bj = 0; bj < rect.width; ++bj) {
          BlockCoefficients coef{};
          for (int c = 0; c < per_plane; ++c) {
            const int k = per_plane == kLumaChannels ? luma_coefficient_index(c) : chroma_coefficient_index(c);
            const int64_t v = (int64_t{tile(p * per_plane + c, bi, bj)} + (1 << (kLatentFracBits - 1))) >> kLatentFracBits;
            coef[k] = static_cast<int32_t>(std::clamp<int64_t>(v, -kMaxSynthesisCoefficient, kMaxSynthesisCoefficient));
          }
          const int top = (rect.top + bi) * kLatentStride;
          const int left = (rect.left + bj) * kLatentStride;
          const int rows = std::min(kLatentStride, height - top);
          const int cols = std::min(kLatentStride, width - left);
          int32_t block[kLatentStride * kLatentStride];
          haar_block_inverse(coef, rows, cols, block, kLatentStride);
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
              out(p, top + i, left + j) = std::clamp(block[i * kLatentStride + j] + mid, 0, peak);
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace jpegai
