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

#include "jpegai/pixel.hpp"

#include <cmath>

#include "jpegai/error.hpp"

namespace jpegai {
namespace {

constexpr double kKr = 0.2126;
constexpr double kKb = 0.0722;
constexpr double kKg = 0.7152;
constexpr double kCrToR = 1.5748;
constexpr double kCbToB = 1.8556;
constexpr double kLiteralKb = 0.07222;

double q12(int16_t v) { return v / 4096.0; }

// 1-D resampling of n input samples to m outputs along a strided line.
template <typename Get, typename Put>
void resample_line(int n, int m, int from, int to, Get get, Put put) {
  if (from == to) {
    for (int o = 0; o < m; ++o) put(o, get(std::min(o, n - 1)));
  } else if (from == 2) {
    for (int o = 0; o < m; ++o) {
      const int k = std::min(o >> 1, n - 1);
      put(o, (o & 1) ? (get(k) + get(std::min(k + 1, n - 1))) / 2.0 : get(k));
    }
  } else {
    for (int o = 0; o < m; ++o) {
      const int k = std::min(2 * o, n - 1);
      put(o, (get(k) + get(std::min(k + 1, n - 1))) / 2.0);
    }
  }
}

}  // namespace

FixedColorVariant color_variant_by_name(const std::string& name) {
  if (name == "bt709") return FixedColorVariant::kBt709;
  if (name == "printed") return FixedColorVariant::kPrinted;
  throw Error("unknown colour variant '" + name + "'");
}

ColorTransform color_transform_from(const PictureHeader& header, FixedColorVariant variant) {
  ColorTransform t;
  t.mode = header.colour_transform_idx;
  t.variant = variant;
  t.matrix = header.colour_matrix;
  return t;
}

RealTensor convert_color(const RealTensor& in, const ColorTransform& t, Exec exec) {
  if (in.channels() != 3) throw Error("convert_color: expected 3 planes");
  if (t.mode < 0 || t.mode > 2) throw Error("convert_color: unknown mode");
  if (t.mode == 2 && !t.matrix) throw Error("convert_color: mode 2 requires a matrix");
  if (t.mode == 1) return in;
  RealTensor out(in.shape());
  const auto Y = in.plane(0);
  const auto Cb = in.plane(1);
  const auto Cr = in.plane(2);
  auto o0 = out.plane(0);
  auto o1 = out.plane(1);
  auto o2 = out.plane(2);
  const auto n = static_cast<int64_t>(Y.size());
  if (t.mode == 2) {
    const auto& a = t.matrix->a;
    const auto& b = t.matrix->b;
#pragma omp parallel for if (exec == Exec::kParallel)
    for (int64_t k = 0; k < n; ++k) {
      o0[k] = Y[k] * q12(a[0][0]) + Cb[k] * q12(a[0][1]) + Cr[k] * q12(a[0][2]) + q12(b[0]);
      o1[k] = Y[k] * q12(a[1][0]) + Cb[k] * q12(a[1][1]) + Cr[k] * q12(a[1][2]) + q12(b[1]);
      o2[k] = Y[k] * q12(a[2][0]) + Cb[k] * q12(a[2][1]) + Cr[k] * q12(a[2][2]) + q12(b[2]);
    }
  } else if (t.variant == FixedColorVariant::kBt709) {
#pragma omp parallel for if (exec == Exec::kParallel)
    for (int64_t k = 0; k < n; ++k) {
      const double dr = kCrToR * (Cr[k] - 0.5);
      const double db = kCbToB * (Cb[k] - 0.5);
      o0[k] = Y[k] + dr;
      o1[k] = Y[k] + (-kKr * dr - kKb * db) / kKg;
      o2[k] = Y[k] + db;
    }
  } else {
#pragma omp parallel for if (exec == Exec::kParallel)
    for (int64_t k = 0; k < n; ++k) {
      const double x0 = Y[k] + kCrToR * (Cr[k] - 0.5);
      const double x1 = Y[k] + kCbToB * (Cr[k] - 0.5);
      o0[k] = x0;
      o1[k] = x1;
      o2[k] = (Y[k] - kKr * x0 - kLiteralKb * x1) / kKg;
    }
  }
  return out;
}

RealTensor rgb_to_ycbcr(const RealTensor& rgb, Exec exec) {
  if (rgb.channels() != 3) throw Error("rgb_to_ycbcr: expected 3 planes");
  RealTensor out(rgb.shape());
  const auto R = rgb.plane(0);
  const auto G = rgb.plane(1);
  const auto B = rgb.plane(2);
  auto y = out.plane(0);
  auto cb = out.plane(1);
  auto cr = out.plane(2);
  const auto n = static_cast<int64_t>(R.size());
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int64_t k = 0; k < n; ++k) {
    const double Y = kKr * R[k] + kKg * G[k] + kKb * B[k];
    y[k] = Y;
    cb[k] = (B[k] - Y) / kCbToB + 0.5;
    cr[k] = (R[k] - Y) / kCrToR + 0.5;
  }
  return out;
}

PlaneTensor scale_clip_output(const RealTensor& x, int bitdepth, Exec exec) {
  if (bitdepth < 8 || bitdepth > 16) throw Error("scale_clip_output: bitdepth must be in [8, 16]");
  const double peak = static_cast<double>((1 << bitdepth) - 1);
  PlaneTensor out(x.shape());
  const auto in = x.data();
  auto o = out.data();
  const auto n = static_cast<int64_t>(in.size());
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int64_t k = 0; k < n; ++k) {
    double v = in[k] * peak;
    if (!(v > 0.0)) v = 0.0;  // also maps NaN to 0
    if (v > peak) v = peak;
    o[k] = static_cast<int32_t>(std::floor(v + 0.5));
  }
  return out;
}

RealTensor normalize_samples(const PlaneTensor& x, int bitdepth) {
  const double peak = static_cast<double>((1 << bitdepth) - 1);
  RealTensor out(x.shape());
  const auto in = x.data();
  auto o = out.data();
  for (std::size_t k = 0; k < in.size(); ++k) o[k] = in[k] / peak;
  return out;
}

RealTensor chroma_resample(const RealTensor& planes, int from_v, int from_h, int to_v, int to_h, int out_h, int out_w,
                           Exec exec) {
  for (int f : {from_v, from_h, to_v, to_h}) {
    if (f != 1 && f != 2) throw Error("chroma_resample: unsupported factor " + std::to_string(f));
  }
  if (out_h < 0 || out_w < 0) throw Error("chroma_resample: negative output size");
  const int C = planes.channels();
  const int H = planes.height();
  const int W = planes.width();
  if (from_v == to_v && from_h == to_h && out_h == H && out_w == W) return planes;
  if ((H == 0 || W == 0) && out_h * out_w > 0) throw Error("chroma_resample: empty input");
  // Vertical pass into (C, out_h, W), then horizontal into (C, out_h, out_w).
  RealTensor mid(C, out_h, W);
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < W; ++j) {
      resample_line(
          H, out_h, from_v, to_v, [&](int k) { return planes(c, k, j); }, [&](int o, double v) { mid(c, o, j) = v; });
    }
  }
  RealTensor out(C, out_h, out_w);
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < out_h; ++i) {
      resample_line(
          W, out_w, from_h, to_h, [&](int k) { return mid(c, i, k); }, [&](int o, double v) { out(c, i, o) = v; });
    }
  }
  return out;
}

}  // namespace jpegai
