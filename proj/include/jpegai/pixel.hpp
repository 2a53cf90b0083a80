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
#include <string>

#include "jpegai/exec.hpp"
#include "jpegai/headers.hpp"
#include "jpegai/tensor.hpp"

namespace jpegai {

// Fixed conversion used for colour_transform_idx 0.
enum class FixedColorVariant {
  kBt709,         // R = Y + 1.5748(Cr-.5), B = Y + 1.8556(Cb-.5), output (R, G, B)
  kPrinted,  // both difference lines read Cr, 0.07222, output (R, B, G)
};

FixedColorVariant color_variant_by_name(const std::string& name);

struct ColorTransform {
  int mode = 0;  // 0 fixed, 1 none, 2 matrix
  FixedColorVariant variant = FixedColorVariant::kBt709;
  std::optional<ColourMatrix> matrix;  // required for mode 2
};

ColorTransform color_transform_from(const PictureHeader& header, FixedColorVariant variant = FixedColorVariant::kBt709);

// Input is 3 x H x W (Y, Cb, Cr) normalised to [0, 1] with chroma already at
// full resolution.
RealTensor convert_color(const RealTensor& ycbcr, const ColorTransform& transform, Exec exec = Exec::kParallel);
// Encoder-side inverse of the fixed BT.709 conversion: (R, G, B) to (Y, Cb, Cr).
RealTensor rgb_to_ycbcr(const RealTensor& rgb, Exec exec = Exec::kParallel);

// clip(0, 2^b - 1, x * (2^b - 1)) rounded half away from zero.
PlaneTensor scale_clip_output(const RealTensor& x, int bitdepth, Exec exec = Exec::kParallel);
// Integer samples to [0, 1].
RealTensor normalize_samples(const PlaneTensor& x, int bitdepth);

// Resamples every channel from chroma factors (from_v, from_h) to
// (to_v, to_h) producing out_h x out_w planes. Upsampling interpolates
// linearly between left-cosited samples with the edge clamped; downsampling
// averages sample pairs.
RealTensor chroma_resample(const RealTensor& planes, int from_v, int from_h, int to_v, int to_h, int out_h, int out_w,
                           Exec exec = Exec::kParallel);

// Top-left anchored crop removing diff_h rows and diff_w columns.
template <typename T>
Tensor3<T> crop_display_window(const Tensor3<T>& image, int diff_w, int diff_h) {
  if (diff_w < 0 || diff_h < 0 || diff_w >= image.width() || diff_h >= image.height()) {
    throw Error("display window crop exceeds the coded size");
  }
  return extract(image, Rect{0, 0, image.height() - diff_h, image.width() - diff_w});
}

}  // namespace jpegai
