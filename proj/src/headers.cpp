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

#include "jpegai/headers.hpp"

#include <string>

#include "jpegai/bitio.hpp"
#include "jpegai/error.hpp"

namespace jpegai {
namespace {

// Field widths of the picture header, in bit order.
constexpr int kProfileBits = 8;
constexpr int kDimBits = 16;
constexpr int kBitdepthBits = 4;  // bitdepth - 8
constexpr int kModelBits = 2;
constexpr int kColourIdxBits = 2;
constexpr int kMatrixBits = 16;
constexpr int kLatentDimBits = 16;
constexpr int kSubstreamBits = 8;  // substream_count - 1
constexpr int kBetaBits = 12;
constexpr int kSkipIdxBits = 3;
constexpr int kDisplayDiffBits = 6;

}  // namespace

void validate(const PictureHeader& h) {
  if (h.height < 1 || h.width < 1 || h.height > 0xffff || h.width > 0xffff) {
    throw FormatError("picture dimensions out of range");
  }
  if (h.bitdepth < 8 || h.bitdepth > 16) throw FormatError("bitdepth must be in [8, 16]");
  if (h.s_ver_minus1 > 1 || h.s_hor_minus1 > 1 || h.c_ver_minus1 > 1 || h.c_hor_minus1 > 1) {
    throw FormatError("subsampling flags must be 0 or 1");
  }
  if (h.model_id > 3) throw FormatError("modelID must be in [0, 3]");
  if (h.colour_transform_idx > 2) throw FormatError("colour_transform_idx 3 is reserved");
  if ((h.colour_transform_idx == 2) != h.colour_matrix.has_value()) {
    throw FormatError("colour matrix must be present iff colour_transform_idx == 2");
  }
  if (h.region_partitioning_flag && (h.region_height == 0 || h.region_width == 0)) {
    throw FormatError("region dimensions must be positive");
  }
  if (!h.region_partitioning_flag && h.region_residual_in_its_own_substream_flag) {
    throw FormatError("own-substream regions require region_partitioning_flag");
  }
  if ((h.synthesis_tile_enable[0] || h.synthesis_tile_enable[1]) && (h.tile_height == 0 || h.tile_width == 0)) {
    throw FormatError("tile dimensions must be positive");
  }
  if (h.substream_count < 1 || h.substream_count > 256) throw FormatError("substream_count must be in [1, 256]");
  for (uint8_t f : h.grfs_y) {
    if (f > 1) throw FormatError("GRFS flags must be 0 or 1");
  }
  for (uint8_t f : h.grfs_uv) {
    if (f > 1) throw FormatError("GRFS flags must be 0 or 1");
  }
  for (int16_t b : h.beta_displacement_log) {
    if (b < -2048 || b > 2047) throw FormatError("betaDisplacementLog must fit in 12 signed bits");
  }
  if (h.skip_threshold_idx > 7) throw FormatError("skip_threshold_idx must be in [0, 7]");
  if (h.diff_display_img_width >= 64 || h.diff_display_img_height >= 64) {
    throw FormatError("display window differences must be < 64");
  }
  if (h.diff_display_img_width >= h.width || h.diff_display_img_height >= h.height) {
    throw FormatError("display window differences exceed the coded size");
  }
}

std::vector<uint8_t> encode_picture_header(const PictureHeader& h) {
  validate(h);
  BitWriter w;
  w.put(h.stream_profile_id, kProfileBits);
  w.put(h.decoder_profile_id, kProfileBits);
  w.put(h.height, kDimBits);
  w.put(h.width, kDimBits);
  w.put(h.bitdepth - 8u, kBitdepthBits);
  w.put_flag(h.s_ver_minus1);
  w.put_flag(h.s_hor_minus1);
  w.put_flag(h.c_ver_minus1);
  w.put_flag(h.c_hor_minus1);
  w.put(h.model_id, kModelBits);
  w.put(h.colour_transform_idx, kColourIdxBits);
  if (h.colour_transform_idx == 2) {
    for (const auto& row : h.colour_matrix->a) {
      for (int16_t v : row) w.put_signed(v, kMatrixBits);
    }
    for (int16_t v : h.colour_matrix->b) w.put_signed(v, kMatrixBits);
  }
  w.put_flag(h.region_partitioning_flag);
  if (h.region_partitioning_flag) {
    w.put_flag(h.region_residual_in_its_own_substream_flag);
    w.put(h.region_height, kLatentDimBits);
    w.put(h.region_width, kLatentDimBits);
  }
  w.put_flag(h.synthesis_tile_enable[0]);
  w.put_flag(h.synthesis_tile_enable[1]);
  if (h.synthesis_tile_enable[0] || h.synthesis_tile_enable[1]) {
    w.put(h.tile_height, kLatentDimBits);
    w.put(h.tile_width, kLatentDimBits);
  }
  w.put(h.substream_count - 1u, kSubstreamBits);
  for (int comp = 0; comp < 2; ++comp) {
    w.put_flag(h.grfs_enable_flag[comp]);
    w.put_flag(h.rvs_enable_flag[comp]);
  }
  if (h.grfs_enable_flag[0]) {
    for (uint8_t f : h.grfs_y) w.put(f, 1);
  }
  if (h.grfs_enable_flag[1]) {
    for (uint8_t f : h.grfs_uv) w.put(f, 1);
  }
  w.put_signed(h.beta_displacement_log[0], kBetaBits);
  w.put_signed(h.beta_displacement_log[1], kBetaBits);
  w.put_flag(h.gain_3d_enable_flag);
  w.put(h.skip_threshold_idx, kSkipIdxBits);
  w.put(h.diff_display_img_width, kDisplayDiffBits);
  w.put(h.diff_display_img_height, kDisplayDiffBits);
  return w.take();
}

PictureHeader decode_picture_header(std::span<const uint8_t> payload, std::size_t base_offset) {
  BitReader r(payload, base_offset);
  PictureHeader h;
  h.stream_profile_id = static_cast<uint8_t>(r.get(kProfileBits));
  h.decoder_profile_id = static_cast<uint8_t>(r.get(kProfileBits));
  h.height = r.get(kDimBits);
  h.width = r.get(kDimBits);
  const uint32_t depth_minus8 = r.get(kBitdepthBits);
  if (depth_minus8 > 8) throw FormatError("bitdepth out of range", base_offset + 4);
  h.bitdepth = static_cast<uint8_t>(depth_minus8 + 8);
  h.s_ver_minus1 = static_cast<uint8_t>(r.get(1));
  h.s_hor_minus1 = static_cast<uint8_t>(r.get(1));
  h.c_ver_minus1 = static_cast<uint8_t>(r.get(1));
  h.c_hor_minus1 = static_cast<uint8_t>(r.get(1));
  h.model_id = static_cast<uint8_t>(r.get(kModelBits));
  h.colour_transform_idx = static_cast<uint8_t>(r.get(kColourIdxBits));
  if (h.colour_transform_idx == 3) throw FormatError("colour_transform_idx 3 is reserved", base_offset + 6);
  if (h.colour_transform_idx == 2) {
    ColourMatrix m;
    for (auto& row : m.a) {
      for (int16_t& v : row) v = static_cast<int16_t>(r.get_signed(kMatrixBits));
    }
    for (int16_t& v : m.b) v = static_cast<int16_t>(r.get_signed(kMatrixBits));
    h.colour_matrix = m;
  }
  h.region_partitioning_flag = r.get_flag();
  if (h.region_partitioning_flag) {
    h.region_residual_in_its_own_substream_flag = r.get_flag();
    h.region_height = static_cast<uint16_t>(r.get(kLatentDimBits));
    h.region_width = static_cast<uint16_t>(r.get(kLatentDimBits));
  }
  h.synthesis_tile_enable[0] = r.get_flag();
  h.synthesis_tile_enable[1] = r.get_flag();
  if (h.synthesis_tile_enable[0] || h.synthesis_tile_enable[1]) {
    h.tile_height = static_cast<uint16_t>(r.get(kLatentDimBits));
    h.tile_width = static_cast<uint16_t>(r.get(kLatentDimBits));
  }
  h.substream_count = static_cast<uint16_t>(r.get(kSubstreamBits) + 1);
  for (int comp = 0; comp < 2; ++comp) {
    h.grfs_enable_flag[comp] = r.get_flag();
    h.rvs_enable_flag[comp] = r.get_flag();
  }
  if (h.grfs_enable_flag[0]) {
    for (uint8_t& f : h.grfs_y) f = static_cast<uint8_t>(r.get(1));
  }
  if (h.grfs_enable_flag[1]) {
    for (uint8_t& f : h.grfs_uv) f = static_cast<uint8_t>(r.get(1));
  }
  h.beta_displacement_log[0] = static_cast<int16_t>(r.get_signed(kBetaBits));
  h.beta_displacement_log[1] = static_cast<int16_t>(r.get_signed(kBetaBits));
  h.gain_3d_enable_flag = r.get_flag();
  h.skip_threshold_idx = static_cast<uint8_t>(r.get(kSkipIdxBits));
  h.diff_display_img_width = static_cast<uint8_t>(r.get(kDisplayDiffBits));
  h.diff_display_img_height = static_cast<uint8_t>(r.get(kDisplayDiffBits));
  r.align();
  if (r.byte_position() != payload.size()) {
    throw FormatError("unexpected trailing bytes in picture header", base_offset + r.byte_position());
  }
  try {
    validate(h);
  } catch (const FormatError& e) {
    throw FormatError(std::string("picture header: ") + e.what(), base_offset);
  }
  return h;
}

std::vector<uint8_t> encode_tools_header(const ToolsHeader& t) {
  BitWriter w;
  w.put_flag(t.lsbs_enable_flag[0]);
  w.put_flag(t.lsbs_enable_flag[1]);
  const FilterParams* filters[] = {&t.efe_linear, &t.icci, &t.efe_nonlinear, &t.lef};
  for (const FilterParams* f : filters) w.put_flag(f->enabled);
  w.align();
  std::vector<uint8_t> out = w.take();
  for (const FilterParams* f : filters) {
    if (!f->enabled) continue;
    append_varint(out, f->blob.size());
    out.insert(out.end(), f->blob.begin(), f->blob.end());
  }
  return out;
}

ToolsHeader decode_tools_header(std::span<const uint8_t> payload, std::size_t base_offset) {
  BitReader r(payload, base_offset);
  ToolsHeader t;
  t.lsbs_enable_flag[0] = r.get_flag();
  t.lsbs_enable_flag[1] = r.get_flag();
  FilterParams* filters[] = {&t.efe_linear, &t.icci, &t.efe_nonlinear, &t.lef};
  for (FilterParams* f : filters) f->enabled = r.get_flag();
  if (r.get(2) != 0) throw FormatError("reserved tools header bits set", base_offset);
  std::size_t pos = 1;
  for (FilterParams* f : filters) {
    if (!f->enabled) continue;
    const uint32_t size = decode_varint(payload, pos, base_offset);
    if (payload.size() - pos < size) throw FormatError("tools header filter blob truncated", base_offset + pos);
    f->blob.assign(payload.begin() + static_cast<std::ptrdiff_t>(pos),
                   payload.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  if (pos != payload.size()) throw FormatError("unexpected trailing bytes in tools header", base_offset + pos);
  return t;
}

ToolsHeader tools_header_from(std::span<const Segment> segments) {
  const Segment* toh = find_segment(segments, marker::kTOH);
  return toh ? decode_tools_header(toh->payload) : ToolsHeader{};
}

}  // namespace jpegai
