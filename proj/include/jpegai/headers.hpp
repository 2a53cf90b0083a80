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

#include "jpegai/container.hpp"

namespace jpegai {

inline constexpr int kPrimaryChannels = 160;
inline constexpr int kSecondaryChannels = 96;
inline constexpr int kMatrixFracBits = 12;  // a[][] and b[] are Q12

// Colour matrix for colour_transform_idx == 2, as signed Q12 values.
struct ColourMatrix {
  std::array<std::array<int16_t, 3>, 3> a{};
  std::array<int16_t, 3> b{};
  bool operator==(const ColourMatrix&) const = default;
};

struct PictureHeader {
  uint8_t stream_profile_id = 0;
  uint8_t decoder_profile_id = 0;
  uint32_t height = 1;  // coded picture size in luma samples
  uint32_t width = 1;
  uint8_t bitdepth = 8;  // output bit depth, 8..16
  // Output (s_*) and coded (c_*) chroma subsampling, each 0 (full) or 1 (half).
  uint8_t s_ver_minus1 = 0;
  uint8_t s_hor_minus1 = 0;
  uint8_t c_ver_minus1 = 0;
  uint8_t c_hor_minus1 = 0;
  uint8_t model_id = 0;              // 0..3
  uint8_t colour_transform_idx = 0;  // 0 fixed, 1 none, 2 matrix
  std::optional<ColourMatrix> colour_matrix;

  bool region_partitioning_flag = false;
  bool region_residual_in_its_own_substream_flag = false;
  uint16_t region_height = 0;  // latent units, present iff region_partitioning_flag
  uint16_t region_width = 0;
  std::array<bool, 2> synthesis_tile_enable{};
  uint16_t tile_height = 0;  // latent units, present iff any synthesis_tile_enable
  uint16_t tile_width = 0;

  uint16_t substream_count = 1;  // 1..256

  std::array<bool, 2> grfs_enable_flag{};
  std::array<bool, 2> rvs_enable_flag{};
  std::array<uint8_t, kPrimaryChannels> grfs_y{};    // present iff grfs_enable_flag[0]
  std::array<uint8_t, kSecondaryChannels> grfs_uv{};  // present iff grfs_enable_flag[1]

  std::array<int16_t, 2> beta_displacement_log{};  // 12-bit signed
  bool gain_3d_enable_flag = false;
  uint8_t skip_threshold_idx = 1;  // 0..7
  uint8_t diff_display_img_width = 0;   // < 64
  uint8_t diff_display_img_height = 0;  // < 64

  int chroma_factor_v() const { return c_ver_minus1 + 1; }
  int chroma_factor_h() const { return c_hor_minus1 + 1; }
  int output_factor_v() const { return s_ver_minus1 + 1; }
  int output_factor_h() const { return s_hor_minus1 + 1; }

  bool operator==(const PictureHeader&) const = default;
};

// Throws FormatError on any reserved or out-of-range field.
void validate(const PictureHeader& header);
std::vector<uint8_t> encode_picture_header(const PictureHeader& header);
PictureHeader decode_picture_header(std::span<const uint8_t> payload, std::size_t base_offset = 0);

struct FilterParams {
  bool enabled = false;
  std::vector<uint8_t> blob;  // opaque; carried but not interpreted
  bool operator==(const FilterParams&) const = default;
};

struct ToolsHeader {
  std::array<bool, 2> lsbs_enable_flag{};
  FilterParams efe_linear;
  FilterParams icci;
  FilterParams efe_nonlinear;
  FilterParams lef;

  bool any_enabled() const {
    return lsbs_enable_flag[0] || lsbs_enable_flag[1] || efe_linear.enabled || icci.enabled ||
           efe_nonlinear.enabled || lef.enabled;
  }
  bool operator==(const ToolsHeader&) const = default;
};

std::vector<uint8_t> encode_tools_header(const ToolsHeader& header);
ToolsHeader decode_tools_header(std::span<const uint8_t> payload, std::size_t base_offset = 0);
// Returns the decoded TOH, or an all-disabled header when none is present.
ToolsHeader tools_header_from(std::span<const Segment> segments);

}  // namespace jpegai
