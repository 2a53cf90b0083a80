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

#include <cmath>

#include "doctest.h"
#include "jpegai/pixel.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace jpegai;
using namespace jpegai::testing;

namespace {

RealTensor triple(double y, double cb, double cr) {
  RealTensor t(3, 1, 1);
  t(0, 0, 0) = y;
  t(1, 0, 0) = cb;
  t(2, 0, 0) = cr;
  return t;
}

ColorTransform fixed(FixedColorVariant v = FixedColorVariant::kBt709) { return ColorTransform{0, v, std::nullopt}; }

}  // namespace

TEST_CASE("achromatic fixed point") {
  for (auto v : {FixedColorVariant::kBt709}) {
    const RealTensor out = convert_color(triple(0.5, 0.5, 0.5), fixed(v));
    for (int c = 0; c < 3; ++c) CHECK(out(c, 0, 0) == 0.5);
  }
}

TEST_CASE("red difference coefficient") {
  const RealTensor out = convert_color(triple(0.5, 0.5, 0.6), fixed());
  CHECK(out(0, 0, 0) == doctest::Approx(0.65748).epsilon(1e-12));
  const RealTensor literal = convert_color(triple(0.5, 0.5, 0.6), fixed(FixedColorVariant::kPrinted));
  CHECK(literal(0, 0, 0) == doctest::Approx(0.65748).epsilon(1e-12));
  CHECK(literal(1, 0, 0) == doctest::Approx(0.5 + 0.18556).epsilon(1e-12));
}

TEST_CASE("fixed conversion matches affine oracles") {
  Rng rng(1);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  const oracle::Affine bt = oracle::bt709();
  const oracle::Affine lit = oracle::printed_form();
  for (int n = 0; n < 2000; ++n) {
    const double y = u(rng);
    const double cb = u(rng);
    const double cr = u(rng);
    const RealTensor a = convert_color(triple(y, cb, cr), fixed());
    const RealTensor b = convert_color(triple(y, cb, cr), fixed(FixedColorVariant::kPrinted));
    const auto ea = bt.apply(y, cb, cr);
    const auto eb = lit.apply(y, cb, cr);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::fabs(a(c, 0, 0) - static_cast<double>(ea[static_cast<std::size_t>(c)])) < 1e-9);
      CHECK(std::fabs(b(c, 0, 0) - static_cast<double>(eb[static_cast<std::size_t>(c)])) < 1e-9);
    }
  }
}

TEST_CASE("rgb to ycbcr inverts the fixed conversion") {
  Rng rng(2);
  RealTensor rgb(3, 4, 5);
  for (auto& v : rgb.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  const RealTensor back = convert_color(rgb_to_ycbcr(rgb), fixed());
  for (std::size_t k = 0; k < rgb.size(); ++k) CHECK(std::fabs(back.data()[k] - rgb.data()[k]) < 1e-12);
}

TEST_CASE("pass-through and matrix modes") {
  Rng rng(3);
  RealTensor x(3, 3, 3);
  for (auto& v : x.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  const RealTensor none = convert_color(x, ColorTransform{1, FixedColorVariant::kBt709, std::nullopt});
  CHECK(none == x);
  ColourMatrix identity;
  for (int k = 0; k < 3; ++k) identity.a[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = 4096;
  CHECK(convert_color(x, ColorTransform{2, FixedColorVariant::kBt709, identity}) == none);
  ColourMatrix m;
  m.a[0] = {4096, 0, 2048};
  m.a[1] = {0, -4096, 0};
  m.a[2] = {1024, 1024, 1024};
  m.b = {0, 4096, -2048};
  const RealTensor out = convert_color(triple(0.25, 0.5, 1.0), ColorTransform{2, FixedColorVariant::kBt709, m});
  CHECK(out(0, 0, 0) == doctest::Approx(0.75));
  CHECK(out(1, 0, 0) == doctest::Approx(0.5));
  CHECK(out(2, 0, 0) == doctest::Approx(0.4375 - 0.5));
  CHECK_THROWS_AS(convert_color(x, ColorTransform{2, FixedColorVariant::kBt709, std::nullopt}), Error);
  CHECK_THROWS_AS(convert_color(RealTensor(2, 1, 1), fixed()), Error);
}

TEST_CASE("colour transform from header") {
  PictureHeader h;
  h.colour_transform_idx = 1;
  CHECK(color_transform_from(h).mode == 1);
  CHECK(color_variant_by_name("printed") == FixedColorVariant::kPrinted);
  CHECK_THROWS_AS(color_variant_by_name("srgb"), Error);
}

TEST_CASE("scale and clip") {
  RealTensor x(1, 1, 5);
  x(0, 0, 0) = 1.0;
  x(0, 0, 1) = -0.1;
  x(0, 0, 2) = 0.5;
  x(0, 0, 3) = 2.0;
  x(0, 0, 4) = std::nan("");
  const PlaneTensor out = scale_clip_output(x, 8);
  CHECK(out(0, 0, 0) == 255);
  CHECK(out(0, 0, 1) == 0);
  CHECK(out(0, 0, 2) == 128);
  CHECK(out(0, 0, 3) == 255);
  CHECK(out(0, 0, 4) == 0);
  CHECK(scale_clip_output(x, 16)(0, 0, 0) == 65535);
  CHECK_THROWS_AS(scale_clip_output(x, 17), Error);
}

TEST_CASE("scale and clip properties") {
  for (int b : {8, 10, 12, 16}) {
    RealTensor ramp(1, 1, 2001);
    for (int k = 0; k < 2001; ++k) ramp(0, 0, k) = -0.5 + k / 1000.0;
    const PlaneTensor out = scale_clip_output(ramp, b);
    for (int k = 1; k < 2001; ++k) CHECK(out(0, 0, k) >= out(0, 0, k - 1));
    PlaneTensor ints(1, 1, 300);
    for (int k = 0; k < 300; ++k) ints(0, 0, k) = k * ((1 << b) - 1) / 299;
    CHECK(scale_clip_output(normalize_samples(ints, b), b) == ints);
  }
}

TEST_CASE("chroma resampling") {
  SUBCASE("ramp upsampling") {
    RealTensor ramp(1, 1, 3);
    ramp(0, 0, 0) = 0;
    ramp(0, 0, 1) = 2;
    ramp(0, 0, 2) = 4;
    const RealTensor up = chroma_resample(ramp, 1, 2, 1, 1, 1, 6);
    const std::vector<double> want{0, 1, 2, 3, 4, 4};
    for (int k = 0; k < 6; ++k) CHECK(up(0, 0, k) == want[static_cast<std::size_t>(k)]);
  }
  SUBCASE("identity") {
    Rng rng(4);
    RealTensor x(2, 5, 7);
    for (auto& v : x.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    CHECK(chroma_resample(x, 2, 2, 2, 2, 5, 7) == x);
  }
  SUBCASE("constant planes") {
    const RealTensor c(2, 4, 5, 0.3);
    const RealTensor up = chroma_resample(c, 2, 2, 1, 1, 8, 9);
    for (double v : up.data()) CHECK(v == doctest::Approx(0.3));
    const RealTensor down = chroma_resample(up, 1, 1, 2, 2, 4, 5);
    for (double v : down.data()) CHECK(v == doctest::Approx(0.3));
  }
  SUBCASE("up then down on a smooth ramp") {
    RealTensor ramp(1, 16, 16);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) ramp(0, i, j) = (i + j) / 255.0;
    }
    const RealTensor round_trip = chroma_resample(chroma_resample(ramp, 1, 1, 2, 2, 8, 8), 2, 2, 1, 1, 16, 16);
    for (std::size_t k = 0; k < ramp.size(); ++k) CHECK(std::fabs(round_trip.data()[k] - ramp.data()[k]) <= 1.0 / 255.0 + 1e-12);
  }
  SUBCASE("bad factor") { CHECK_THROWS_AS(chroma_resample(RealTensor(1, 2, 2), 3, 1, 1, 1, 2, 2), Error); }
}

TEST_CASE("display window crop") {
  Rng rng(5);
  const PlaneTensor img = random_plane(rng, {3, 64, 64}, 0, 255);
  CHECK(crop_display_window(img, 0, 0) == img);
  const PlaneTensor out = crop_display_window(img, 3, 5);
  CHECK(out.shape() == Shape3{3, 59, 61});
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 59; ++i) {
      for (int j = 0; j < 61; ++j) CHECK(out(c, i, j) == img(c, i, j));
    }
  }
  CHECK_THROWS_AS(crop_display_window(img, 64, 0), Error);
  CHECK_THROWS_AS(crop_display_window(img, 0, 70), Error);
}

TEST_CASE("serial and parallel colour kernels agree") {
  Rng rng(6);
  RealTensor x(3, 40, 37);
  for (auto& v : x.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  CHECK(convert_color(x, fixed(), Exec::kSerial) == convert_color(x, fixed(), Exec::kParallel));
  CHECK(scale_clip_output(x, 10, Exec::kSerial) == scale_clip_output(x, 10, Exec::kParallel));
  CHECK(chroma_resample(x, 2, 2, 1, 1, 80, 73, Exec::kSerial) == chroma_resample(x, 2, 2, 1, 1, 80, 73, Exec::kParallel));
}
