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

#include <string>

#include "jpegai/error.hpp"
#include "jpegai/geometry.hpp"
#include "jpegai/transform.hpp"

namespace jpegai {
namespace {

std::vector<Rect> uniform_grid(int h, int w, int cell_h, int cell_w) {
  std::vector<Rect> out;
  for (int top = 0; top < h; top += cell_h) {
    for (int left = 0; left < w; left += cell_w) {
      out.push_back(Rect{top, left, std::min(cell_h, h - top), std::min(cell_w, w - left)});
    }
  }
  return out;
}

}  // namespace

PadPlan compute_pad_plan(int height, int width) {
  if (height < 1 || width < 1) throw Error("pad plan: picture must be at least 1x1");
  PadPlan plan;
  plan.heights[0] = height;
  plan.widths[0] = width;
  for (int k = 0; k < kPadLevels; ++k) {
    plan.pad_vertical[k] = plan.heights[k] & 1;
    plan.pad_horizontal[k] = plan.widths[k] & 1;
    plan.heights[k + 1] = (plan.heights[k] + 1) / 2;
    plan.widths[k + 1] = (plan.widths[k] + 1) / 2;
  }
  return plan;
}

int RegionGrid::region_of(int i, int j) const {
  if (!partitioning) return 0;
  const int per_row = ceil_div(latent_width, region_width);
  return (i / region_height) * per_row + j / region_width;
}

std::vector<int> RegionGrid::labels() const {
  std::vector<int> out(static_cast<std::size_t>(latent_height) * latent_width);
  for (int i = 0; i < latent_height; ++i) {
    for (int j = 0; j < latent_width; ++j) out[static_cast<std::size_t>(i) * latent_width + j] = region_of(i, j);
  }
  return out;
}

Rect RegionGrid::scale_down(const Rect& r, int cv, int ch, int h, int w) {
  const int top = std::min(ceil_div(r.top, cv), h);
  const int left = std::min(ceil_div(r.left, ch), w);
  const int bottom = std::min(ceil_div(r.bottom(), cv), h);
  const int right = std::min(ceil_div(r.right(), ch), w);
  return Rect{top, left, bottom - top, right - left};
}

RegionGrid build_region_grid(const PictureHeader& header, int latent_h, int latent_w) {
  RegionGrid g;
  g.latent_height = latent_h;
  g.latent_width = latent_w;
  g.partitioning = header.region_partitioning_flag;
  g.own_substream = header.region_residual_in_its_own_substream_flag;
  g.tiles_enabled = header.synthesis_tile_enable[0] || header.synthesis_tile_enable[1];
  if (g.tiles_enabled) {
    g.tile_height = header.tile_height;
    g.tile_width = header.tile_width;
    g.tiles = uniform_grid(latent_h, latent_w, g.tile_height, g.tile_width);
  } else {
    g.tiles = {Rect{0, 0, latent_h, latent_w}};
  }
  if (!g.partitioning) {
    g.region_height = latent_h;
    g.region_width = latent_w;
    g.regions = {Rect{0, 0, latent_h, latent_w}};
    return g;
  }
  g.region_height = header.region_height;
  g.region_width = header.region_width;
  if (g.region_height < 1 || g.region_width < 1) throw FormatError("region dimensions must be positive");
  if (g.own_substream) {
    if (g.tiles_enabled && (g.region_height % g.tile_height != 0 || g.region_width % g.tile_width != 0)) {
      throw FormatError("region " + std::to_string(g.region_height) + "x" + std::to_string(g.region_width) +
                        " is not a whole number of " + std::to_string(g.tile_height) + "x" +
                        std::to_string(g.tile_width) + " synthesis tiles");
    }
    if ((header.c_ver_minus1 && (g.region_height & 1)) || (header.c_hor_minus1 && (g.region_width & 1))) {
      throw FormatError("region dimensions must be even when chroma is subsampled");
    }
  }
  g.regions = uniform_grid(latent_h, latent_w, g.region_height, g.region_width);
  if (g.regions.size() > 256) throw FormatError("more than 256 regions");
  // Uniform grids cannot overlap; check coverage anyway.
  std::size_t area = 0;
  for (const Rect& r : g.regions) area += r.area();
  if (area != static_cast<std::size_t>(latent_h) * latent_w) throw FormatError("regions do not tile the latent grid");
  return g;
}

RegionGrid build_region_grid(const PictureHeader& header) {
  return build_region_grid(header, ceil_div(static_cast<int>(header.height), kLatentStride),
                           ceil_div(static_cast<int>(header.width), kLatentStride));
}

}  // namespace jpegai
