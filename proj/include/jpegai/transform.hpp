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
#include <string>

#include "jpegai/exec.hpp"
#include "jpegai/tensor.hpp"

namespace jpegai {

inline constexpr int kLatentStride = 16;  // picture samples per latent sample
inline constexpr int kHyperCell = 4;      // latent samples per hyper sample
inline constexpr int kLumaChannels = 160;
inline constexpr int kChromaChannels = 96;
inline constexpr int kChromaPlaneChannels = 48;
inline constexpr int kBlockCoefficients = kLatentStride * kLatentStride;

// Four-level integer Haar (S-transform lifting) of one block of up to 16x16
// samples. Odd sizes are padded by repeating the last row/column at each
// level. Coefficients are returned coarse to fine: LL4, HL4, LH4, HH4, then
// HL, LH, HH for levels 3, 2 and 1, each band in raster order at its full
// size (1, 4, 16, 64); slots a partial block does not reach are zero.
using BlockCoefficients = std::array<int32_t, kBlockCoefficients>;
BlockCoefficients haar_block_forward(const int32_t* samples, int rows, int cols, std::ptrdiff_t stride);
void haar_block_inverse(const BlockCoefficients& coefficients, int rows, int cols, int32_t* samples,
                        std::ptrdiff_t stride);

// Index into BlockCoefficients of latent channel `c`; luma keeps everything up
// to HL1 plus the even rows of LH1, chroma everything up to LH2.
int luma_coefficient_index(int c);
int chroma_coefficient_index(int c);

// Pluggable analysis/synthesis pair. Only the toy Haar pair ships; decoder
// IDs select different synthesis tile sizes of it.
struct TransformPair {
  std::string name;
  int tile_height = 0;  // latent units; 0 = whole picture
  int tile_width = 0;
};

TransformPair transform_for_decoder(int decoder_id);
TransformPair transform_by_name(const std::string& name);

// samples: P planes of integer picture samples in [0, 2^bitdepth). Output
// has P * per_plane channels (160 for luma, 48 per chroma plane) on a
// ceil(H/16) x ceil(W/16) grid, in latent units.
PlaneTensor analysis(const PlaneTensor& samples, int bitdepth, int per_plane, Exec exec = Exec::kParallel);
// Inverse direction; output is clipped to the sample range. Tiles of
// tile_h x tile_w latent samples are synthesised independently.
PlaneTensor synthesis(const PlaneTensor& latent, int planes, int height, int width, int bitdepth, int tile_h = 0,
                      int tile_w = 0, Exec exec = Exec::kParallel);

}  // namespace jpegai
