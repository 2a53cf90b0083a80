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

#include <filesystem>

#include "doctest.h"
#include "jpegai/geometry.hpp"
#include "jpegai/tables.hpp"
#include "jpegai/transform.hpp"
#include "support/generators.hpp"

using namespace jpegai;
using namespace jpegai::testing;

namespace {

int ceil_pow2(int v, int k) { return (v + (1 << k) - 1) >> k; }

PictureHeader grid_header(int h, int w) {
  PictureHeader hd;
  hd.height = static_cast<uint32_t>(h);
  hd.width = static_cast<uint32_t>(w);
  return hd;
}

}  // namespace

TEST_CASE("haar block is lossless") {
  Rng rng(1);
  for (int n = 0; n < 500; ++n) {
    const int rows = uniform(rng, 1, 16);
    const int cols = uniform(rng, 1, 16);
    int32_t block[256];
    for (int k = 0; k < 256; ++k) block[k] = uniform(rng, -40000, 40000);
    const BlockCoefficients coef = haar_block_forward(block, rows, cols, 16);
    int32_t back[256] = {};
    haar_block_inverse(coef, rows, cols, back, 16);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) REQUIRE(back[i * 16 + j] == block[i * 16 + j]);
    }
  }
  int32_t block[256];
  CHECK_THROWS_AS(haar_block_forward(block, 0, 4, 16), Error);
  CHECK_THROWS_AS(haar_block_forward(block, 17, 4, 16), Error);
}

TEST_CASE("coefficient selection") {
  CHECK(luma_coefficient_index(0) == 0);
  CHECK(luma_coefficient_index(127) == 127);
  CHECK(luma_coefficient_index(128) == 128);  // LH1 row 0
  CHECK(luma_coefficient_index(136) == 144);  // LH1 row 2
  CHECK(chroma_coefficient_index(47) == 47);
  std::vector<int> seen;
  for (int c = 0; c < kLumaChannels; ++c) seen.push_back(luma_coefficient_index(c));
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  CHECK_THROWS_AS(luma_coefficient_index(160), Error);
  CHECK_THROWS_AS(chroma_coefficient_index(48), Error);
}

TEST_CASE("analysis and synthesis") {
  Rng rng(2);
  SUBCASE("constant picture survives exactly") {
    const PlaneTensor img(1, 37, 53, 200);
    const PlaneTensor lat = analysis(img, 8, kLumaChannels);
    CHECK(lat.shape() == Shape3{160, 3, 4});
    CHECK(synthesis(lat, 1, 37, 53, 8) == img);
    const PlaneTensor chroma(2, 19, 27, 77);
    CHECK(synthesis(analysis(chroma, 8, kChromaPlaneChannels), 2, 19, 27, 8) == chroma);
  }
  SUBCASE("tiled equals untiled") {
    for (int n = 0; n < 10; ++n) {
      const int h = uniform(rng, 1, 200);
      const int w = uniform(rng, 1, 200);
      const PlaneTensor img = random_plane(rng, {1, h, w}, 0, 1023);
      const PlaneTensor lat = analysis(img, 10, kLumaChannels);
      const PlaneTensor whole = synthesis(lat, 1, h, w, 10);
      for (auto [th, tw] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{4, 4}, std::pair{8, 8}}) {
        CHECK(synthesis(lat, 1, h, w, 10, th, tw) == whole);
        CHECK(synthesis(lat, 1, h, w, 10, th, tw, Exec::kSerial) == whole);
      }
    }
  }
  SUBCASE("reconstruction error is bounded on smooth content") {
    PlaneTensor img(1, 64, 64);
    for (int i = 0; i < 64; ++i) {
      for (int j = 0; j < 64; ++j) img(0, i, j) = 2 * i + j;
    }
    const PlaneTensor back = synthesis(analysis(img, 8, kLumaChannels), 1, 64, 64, 8);
    for (std::size_t k = 0; k < img.size(); ++k) CHECK(std::abs(back.data()[k] - img.data()[k]) <= 2);
  }
  SUBCASE("extreme latents are clipped, not overflowed") {
    const PlaneTensor lat(160, 2, 2, INT32_MAX);
    const PlaneTensor out = synthesis(lat, 1, 32, 32, 8);
    for (int32_t v : out.data()) CHECK((v >= 0 && v <= 255));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synthesis(PlaneTensor(160, 2, 2), 1, 64, 64, 8), Error);
    CHECK_THROWS_AS(synthesis(PlaneTensor(161, 2, 2), 1, 32, 32, 8), Error);
    CHECK_THROWS_AS(analysis(PlaneTensor(1, 4, 4), 8, 100), Error);
  }
}

TEST_CASE("decoder operating points") {
  CHECK(transform_for_decoder(0).tile_height == 4);
  CHECK(transform_for_decoder(1).tile_height == 8);
  CHECK(transform_for_decoder(2).tile_height == 0);
  CHECK_THROWS_AS(transform_for_decoder(3), Error);
  CHECK(transform_by_name("toy-haar").name == "toy-haar");
  CHECK_THROWS_AS(transform_by_name("cnn"), Error);
}

TEST_CASE("pad plan examples") {
  const PadPlan a = compute_pad_plan(64, 64);
  for (int k = 0; k < kPadLevels; ++k) {
    CHECK_FALSE(a.pad_vertical[static_cast<std::size_t>(k)]);
    CHECK_FALSE(a.pad_horizontal[static_cast<std::size_t>(k)]);
  }
  CHECK(a.latent_height() == 4);
  CHECK(a.hyper_height() == 1);

  const PadPlan b = compute_pad_plan(65, 64);
  CHECK(b.heights == std::array<int, 7>{65, 33, 17, 9, 5, 3, 2});
  for (int k = 0; k < 4; ++k) CHECK(b.pad_vertical[static_cast<std::size_t>(k)]);
  CHECK(b.latent_height() == 5);
  CHECK(b.hyper_height() == 2);
  CHECK_THROWS_AS(compute_pad_plan(0, 5), Error);
}

TEST_CASE("pad plan matches ceil division everywhere") {
  for (int h = 1; h <= 300; ++h) {
    const PadPlan p = compute_pad_plan(h, 301 - h);
    for (int k = 0; k <= kPadLevels; ++k) {
      REQUIRE(p.heights[static_cast<std::size_t>(k)] == ceil_pow2(h, k));
      REQUIRE(p.widths[static_cast<std::size_t>(k)] == ceil_pow2(301 - h, k));
      if (k < kPadLevels) {
        REQUIRE(p.pad_vertical[static_cast<std::size_t>(k)] == (ceil_pow2(h, k) % 2 == 1));
      }
    }
  }
}

TEST_CASE("region grid") {
  SUBCASE("no partitioning") {
    const RegionGrid g = build_region_grid(grid_header(100, 130));
    CHECK(g.region_count() == 1);
    CHECK(g.regions[0] == Rect{0, 0, 7, 9});
    CHECK(g.region_of(6, 8) == 0);
  }
  SUBCASE("regions of whole tiles") {
    PictureHeader h = grid_header(128, 128);
    h.region_partitioning_flag = true;
    h.region_residual_in_its_own_substream_flag = true;
    h.region_height = 4;
    h.region_width = 4;
    h.synthesis_tile_enable = {true, true};
    h.tile_height = 2;
    h.tile_width = 2;
    const RegionGrid g = build_region_grid(h);
    CHECK(g.region_count() == 4);
    CHECK(g.tiles.size() == 16);
    for (const Rect& r : g.regions) {
      int inside = 0;
      for (const Rect& t : g.tiles) inside += r.contains(t.top, t.left) ? 1 : 0;
      CHECK(inside == 4);
    }
    CHECK(g.region_of(5, 2) == 2);
    const auto labels = g.labels();
    CHECK(labels[static_cast<std::size_t>(7 * 8 + 7)] == 3);
    h.region_height = 3;
    CHECK_THROWS_AS(build_region_grid(h), FormatError);
  }
  SUBCASE("partial edge regions and odd sizes with subsampled chroma") {
    PictureHeader h = grid_header(100, 100);
    h.region_partitioning_flag = true;
    h.region_height = 3;
    h.region_width = 5;
    const RegionGrid g = build_region_grid(h);
    CHECK(g.region_count() == 3 * 2);
    CHECK(g.regions.back() == Rect{6, 5, 1, 2});
    h.region_residual_in_its_own_substream_flag = true;
    h.c_ver_minus1 = 1;
    CHECK_THROWS_AS(build_region_grid(h), FormatError);
  }
  SUBCASE("too many regions") {
    PictureHeader h = grid_header(4096, 4096);
    h.region_partitioning_flag = true;
    h.region_height = 1;
    h.region_width = 1;
    CHECK_THROWS_AS(build_region_grid(h), FormatError);
  }
  SUBCASE("scaled regions partition the chroma grid") {
    Rng rng(3);
    for (int n = 0; n < 200; ++n) {
      PictureHeader h = grid_header(uniform(rng, 1, 400), uniform(rng, 1, 400));
      h.region_partitioning_flag = true;
      h.region_height = static_cast<uint16_t>(uniform(rng, 1, 9));
      h.region_width = static_cast<uint16_t>(uniform(rng, 1, 9));
      RegionGrid g;
      try {
        g = build_region_grid(h);
      } catch (const FormatError&) {
        continue;
      }
      const int cv = uniform(rng, 1, 2);
      const int ch = uniform(rng, 1, 2);
      const int hc = ceil_div(g.latent_height, cv);
      const int wc = ceil_div(g.latent_width, ch);
      std::vector<int> hits(static_cast<std::size_t>(hc * wc), 0);
      for (const Rect& r : g.regions) {
        const Rect s = RegionGrid::scale_down(r, cv, ch, hc, wc);
        for (int i = s.top; i < s.bottom(); ++i) {
          for (int j = s.left; j < s.right(); ++j) ++hits[static_cast<std::size_t>(i * wc + j)];
        }
      }
      for (int v : hits) REQUIRE(v == 1);
    }
  }
}

TEST_CASE("table file") {
  const TableSet& t = default_tables();
  const auto bytes = serialize_tables(t);
  const TableSet back = parse_tables(bytes);
  CHECK(serialize_tables(back) == bytes);
  CHECK(back.residual_cdf.counts == t.residual_cdf.counts);
  CHECK(back.hyper_cdf.bounds == t.hyper_cdf.bounds);
  CHECK(back.sigma_edges == t.sigma_edges);
  CHECK(back.skip_ladder == t.skip_ladder);
  CHECK(back.gain.m_inv == t.gain.m_inv);
  CHECK(back.gain.step == t.gain.step);
  CHECK(serialize_tables(generate_default_tables()) == bytes);

  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] ^= 1;
    CHECK_THROWS_AS(parse_tables(b), FormatError);
  }
  SUBCASE("bad version") {
    auto b = bytes;
    b[4] = 9;
    CHECK_THROWS_AS(parse_tables(b), FormatError);
  }
  SUBCASE("truncated") {
    CHECK_THROWS_AS(parse_tables(std::span<const uint8_t>(bytes).first(bytes.size() - 1)), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto b = bytes;
    b.push_back(0);
    CHECK_THROWS_AS(parse_tables(b), FormatError);
  }
  SUBCASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "jpegai_tables_test.bin";
    save_tables_file(t, path.string());
    CHECK(serialize_tables(load_tables_file(path.string())) == bytes);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_tables_file(path.string()), IoError);
  }
}
