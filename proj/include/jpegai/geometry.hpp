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
#include <vector>

#include "jpegai/headers.hpp"
#include "jpegai/tensor.hpp"

namespace jpegai {

inline constexpr int kAnalysisLevels = 4;
inline constexpr int kHyperLevels = 2;
inline constexpr int kPadLevels = kAnalysisLevels + kHyperLevels;

// Padding of each stride-2 stage: a level whose input size is odd is
// extended by one sample.
struct PadPlan {
  std::array<int, kPadLevels + 1> heights{};  // input of level k; last entry is the hyper size
  std::array<int, kPadLevels + 1> widths{};
  std::array<bool, kPadLevels> pad_vertical{};
  std::array<bool, kPadLevels> pad_horizontal{};

  int latent_height() const { return heights[kAnalysisLevels]; }
  int latent_width() const { return widths[kAnalysisLevels]; }
  int hyper_height() const { return heights[kPadLevels]; }
  int hyper_width() const { return widths[kPadLevels]; }
};

PadPlan compute_pad_plan(int height, int width);

// Region and synthesis-tile layout on the primary latent grid.
struct RegionGrid {
  int latent_height = 0;
  int latent_width = 0;
  bool partitioning = false;
  bool own_substream = false;
  int region_height = 0;
  int region_width = 0;
  bool tiles_enabled = false;
  int tile_height = 0;
  int tile_width = 0;
  std::vector<Rect> regions;  // raster order; index = region_idx
  std::vector<Rect> tiles;

  int region_count() const { return static_cast<int>(regions.size()); }
  int region_of(int i, int j) const;
  // Region index per latent position, row-major.
  std::vector<int> labels() const;
  // The same region on a grid subsampled by (cv, ch) of size h x w. Both
  // edges round up, so scaled regions still partition the smaller grid.
  static Rect scale_down(const Rect& r, int cv, int ch, int h, int w);
};

// Builds the grid for a latent of latent_h x latent_w. Throws FormatError
// when the own-substream region constraints are violated.
RegionGrid build_region_grid(const PictureHeader& header, int latent_h, int latent_w);
RegionGrid build_region_grid(const PictureHeader& header);

}  // namespace jpegai
