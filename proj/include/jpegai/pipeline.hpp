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
#include <string>
#include <vector>

#include "jpegai/entropy.hpp"
#include "jpegai/exec.hpp"
#include "jpegai/geometry.hpp"
#include "jpegai/headers.hpp"
#include "jpegai/latent.hpp"
#include "jpegai/pixel.hpp"
#include "jpegai/tables.hpp"
#include "jpegai/tensor.hpp"

namespace jpegai {

enum class ColorSpace { kRgb, kYcbcr };

// Three planes of integer samples. For kYcbcr the chroma planes are
// subsampled by (sub_v, sub_h); RGB planes always share the luma size.
struct Image {
  ColorSpace space = ColorSpace::kRgb;
  int bitdepth = 8;
  int sub_v = 1;
  int sub_h = 1;
  std::array<PlaneTensor, 3> planes;  // each 1 x h x w

  int height() const { return planes[0].height(); }
  int width() const { return planes[0].width(); }
  // Throws Error when plane sizes, sample range or bit depth are inconsistent.
  void validate() const;
  bool operator==(const Image&) const = default;
};

Image make_image(ColorSpace space, int height, int width, int bitdepth, int sub_v = 1, int sub_h = 1);

struct EncodeConfig {
  int model_id = 0;
  std::array<int, 2> beta{};  // beta_displacement_log per component
  // Coded chroma subsampling (1 or 2 per axis).
  int chroma_v = 2;
  int chroma_h = 2;
  // -1 picks 0 for RGB input and 1 for YCbCr input.
  int colour_transform_idx = -1;
  std::optional<ColourMatrix> colour_matrix;
  // Output chroma subsampling; 0 follows the coded one for idx 1 and 1 otherwise.
  int output_v = 0;
  int output_h = 0;

  bool region_partitioning = false;
  bool own_substream = false;
  int region_height = 0;  // latent units
  int region_width = 0;
  std::array<bool, 2> tile_enable{};
  int tile_height = 0;
  int tile_width = 0;

  int substream_count = 1;
  int skip_threshold_idx = 1;

  std::array<bool, 2> grfs_enable{};
  std::array<bool, 2> rvs_enable{};
  std::array<uint8_t, kPrimaryChannels> grfs_y{};
  std::array<uint8_t, kSecondaryChannels> grfs_uv{};
  ToolsHeader tools;
  std::optional<PlaneTensor> gain3d;  // 1 x latent_h x latent_w

  // Pads the coded picture to a multiple of 64 and signals the crop.
  bool pad_to_64 = true;
  std::string predictor = "neighbour-mean";
  PhaseOrder phase_order = kDefaultPhaseOrder;
  const TableSet* tables = nullptr;  // default tables when null
  Exec exec = Exec::kParallel;
};

struct DecodeOptions {
  int decoder_id = 2;
  // Region indices to decode; empty decodes all. Other regions stay zero.
  std::vector<int> regions;
  // Fraction of residual substreams kept per region (progressive decoding).
  double keep_fraction = 1.0;
  bool apply_tools = true;
  // Zero-fill a region whose residual fails to decode instead of throwing.
  bool conceal = false;
  std::string predictor = "neighbour-mean";
  PhaseOrder phase_order = kDefaultPhaseOrder;
  FixedColorVariant color_variant = FixedColorVariant::kBt709;
  const TableSet* tables = nullptr;
  Exec exec = Exec::kParallel;
};

// Everything entropy decoding produces. Reconstruction reads only this.
struct EntropyDecoded {
  PictureHeader header;
  ToolsHeader tools;
  RegionGrid grid;
  std::optional<PlaneTensor> gain3d;
  PlaneTensor z_y;  // hyper latents
  PlaneTensor z_uv;
  PlaneTensor sigma_y;  // I_sigma after gain and RVS, as used by the coder
  PlaneTensor sigma_uv;
  PlaneTensor pooled_y;  // pooled I_sigma after gain
  PlaneTensor pooled_uv;
  PlaneTensor residual_y;  // coded integers
  PlaneTensor residual_uv;
  std::vector<int> decoded_regions;
  std::vector<int> concealed_regions;
  std::vector<std::string> diagnostics;
  DecodeStats stats;
};

struct Latents {
  PlaneTensor y;   // 160 x h x w
  PlaneTensor uv;  // 96 x hc x wc
};

// Toy hyper path shared by the encoder and the decoder.
int hyper_step(int channel, int per_plane);
PlaneTensor hyper_analysis(const PlaneTensor& latent, int per_plane);
// p for the primary latent: 640 channels, every stage group identical.
PlaneTensor hyper_prediction_primary(const PlaneTensor& z, int height, int width);
PlaneTensor hyper_prediction_secondary(const PlaneTensor& z, int height, int width);
PlaneTensor hyper_sigma(const PlaneTensor& z, int height, int width, int per_plane);

std::vector<uint8_t> encode(const Image& image, const EncodeConfig& config = {});

EntropyDecoded decode_entropy(std::span<const uint8_t> codestream, const DecodeOptions& options = {});
Latents reconstruct_latents(const EntropyDecoded& decoded, const DecodeOptions& options = {});
Image reconstruct(const EntropyDecoded& decoded, const DecodeOptions& options = {});
Image decode(std::span<const uint8_t> codestream, const DecodeOptions& options = {});
Image progressive_decode(std::span<const uint8_t> codestream, double keep_fraction, DecodeOptions options = {});

// Number of substreams kept for a fraction in [0, 1].
int substreams_kept(int count, double keep_fraction);

}  // namespace jpegai
