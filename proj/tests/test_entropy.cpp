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
#include <numeric>

#include "doctest.h"
#include "jpegai/entropy.hpp"
#include "jpegai/tables.hpp"
#include "support/entropy_cases.hpp"

using namespace jpegai;
using namespace jpegai::testing;

namespace {

CdfTable single_row_cdf(std::vector<uint16_t> counts, int bound, int alphabet, int rows = 1) {
  CdfTable cdf;
  cdf.rows = rows;
  cdf.alphabet = alphabet;
  counts.resize(static_cast<std::size_t>(alphabet), 0);
  for (int r = 0; r < rows; ++r) {
    cdf.counts.insert(cdf.counts.end(), counts.begin(), counts.end());
    cdf.bounds.push_back(static_cast<uint16_t>(bound));
  }
  return cdf;
}

// Every (state, refill bits) pair the decoder can produce must be mapped
// back to the same state and bits by the encoder step.
void check_encode_inverts_decode(const TansRow& row) {
  for (int u = 0; u < kStates; ++u) {
    const DecodeEntry& e = row.decode[static_cast<std::size_t>(u)];
    const int slot = e.symbol + row.bound;
    REQUIRE(slot >= 0);
    REQUIRE(slot < row.active);
    REQUIRE(e.nbits <= kTableLog);
    const uint32_t count = row.counts[static_cast<std::size_t>(slot)];
    for (uint32_t bits = 0; bits < (1u << e.nbits); ++bits) {
      const uint32_t next = e.next | bits;
      REQUIRE(next < static_cast<uint32_t>(kStates));
      const uint32_t x = next + kStates;
      int nbits = kTableLog - (std::bit_width(count) - 1);
      if ((x >> nbits) < count) --nbits;
      CHECK(nbits == e.nbits);
      CHECK((x & ((1u << nbits) - 1u)) == bits);
      CHECK(row.encode[row.cumulative[static_cast<std::size_t>(slot)] + (x >> nbits) - count] == u);
    }
  }
}

ResidualModel model_for(const TableSet& t, int32_t threshold = INT32_MIN, const CubeFlags* cubes = nullptr) {
  return ResidualModel{&t.residual_tans, &t.quantizer, threshold, cubes};
}

}  // namespace

TEST_CASE("default CDF tables") {
  const CdfTable r = default_residual_cdf();
  const CdfTable h = default_hyper_cdf();
  CHECK(r.rows == 32);
  CHECK(r.alphabet == 256);
  CHECK(h.rows == 128);
  CHECK(h.alphabet == 64);
  for (const CdfTable* t : {&r, &h}) {
    for (int row = 0; row < t->rows; ++row) {
      const auto counts = t->row(row);
      CHECK(std::accumulate(counts.begin(), counts.end(), 0) == 256);
      const int n = t->active(row);
      for (int s = 0; s < n; ++s) CHECK(counts[static_cast<std::size_t>(s)] >= 1);
      CHECK(t->cumulative(row, n) == 256);
    }
  }
  CHECK_NOTHROW(r.validate());
}

TEST_CASE("gaussian row limits") {
  SUBCASE("wide sigma is near uniform") {
    const auto counts = gaussian_row_counts(1e6, 63);
    const auto [lo, hi] = std::minmax_element(counts.begin() + 1, counts.end());
    CHECK(*hi - *lo <= 1);
  }
  SUBCASE("narrow sigma concentrates on zero") {
    const int b = 4;
    const auto counts = gaussian_row_counts(1e-3, b);
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (static_cast<int>(s) == b) {
        CHECK(counts[s] == 256 - static_cast<int>(counts.size()) + 1);
      } else {
        CHECK(counts[s] == 1);
      }
    }
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(gaussian_row_counts(0.0, 4), Error);
    CHECK_THROWS_AS(gaussian_row_counts(1.0, 0), Error);
    const std::vector<double> not_monotone{1.0, 0.5, 0.7};
    CHECK_THROWS_AS(build_gaussian_cdf(not_monotone, 256, 127), Error);
  }
}

TEST_CASE("uniform four symbol table") {
  const TansTables t = build_tans_tables(single_row_cdf({64, 64, 64, 64}, 2, 256));
  const TansRow& row = t.rows[0];
  std::array<int, 4> seen{};
  for (const DecodeEntry& e : row.decode) {
    CHECK(e.nbits == 2);
    ++seen[static_cast<std::size_t>(e.symbol + 2)];
  }
  CHECK(seen == std::array<int, 4>{64, 64, 64, 64});
  check_encode_inverts_decode(row);
}

TEST_CASE("single symbol table") {
  const TansTables t = build_tans_tables(single_row_cdf({256}, 0, 64));
  // A certain symbol costs no bits.
  for (const DecodeEntry& e : t.rows[0].decode) {
    CHECK(e.nbits == 0);
    CHECK(e.symbol == 0);
  }
  check_encode_inverts_decode(t.rows[0]);
}

TEST_CASE("default tables invert exhaustively") {
  const TableSet& t = default_tables();
  for (const TansRow& row : t.residual_tans.rows) check_encode_inverts_decode(row);
  for (const TansRow& row : t.hyper_tans.rows) check_encode_inverts_decode(row);
}

TEST_CASE("skewed table approaches entropy") {
  // Slot 0 (value -1) is the escape marker; its payload is 4 bits here.
  const TansTables t = build_tans_tables(single_row_cdf({64, 192}, 1, 256, kResidualRows));
  const SigmaQuantizer q;
  const ResidualModel model{&t, &q, INT32_MIN, nullptr};
  Rng rng(11);
  PlaneTensor residual(1, 100, 1000);
  for (auto& v : residual.data()) v = coin(rng, 0.25) ? -1 : 0;
  const PlaneTensor sigma(residual.shape(), 2000);
  const auto bytes = tans_encode_plane(residual, sigma, model);
  DecodeStats stats;
  CHECK(tans_decode_plane(bytes, sigma, model, &stats) == residual);
  const double coded = static_cast<double>(stats.bits_read - 4 * stats.escapes - 2 * kTableLog) / 1e5;
  const double h = row_entropy(std::vector<uint16_t>{64, 192});
  CHECK(h == doctest::Approx(0.8113).epsilon(1e-3));
  CHECK(std::abs(coded - h) / h < 0.02);
}

TEST_CASE("escape path") {
  const TableSet& t = default_tables();
  const ResidualModel model = model_for(t);
  const int32_t sigma_value = 1500;
  const int row = t.quantizer.row(sigma_value);
  const int bound = t.residual_tans.rows[static_cast<std::size_t>(row)].bound;
  PlaneTensor residual(1, 1, 4, 0);
  residual(0, 0, 1) = -(bound + 3);
  const PlaneTensor sigma(residual.shape(), sigma_value);
  const auto bytes = tans_encode_plane(residual, sigma, model);
  DecodeStats stats;
  std::vector<uint32_t> bits(4, 0);
  stats.position_bits = &bits;
  CHECK(tans_decode_plane(bytes, sigma, model, &stats) == residual);
  CHECK(stats.escapes == 1);
  const DecodeEntry* marker = nullptr;
  for (const DecodeEntry& e : t.residual_tans.rows[static_cast<std::size_t>(row)].decode) {
    if (e.symbol == -bound) marker = &e;
  }
  REQUIRE(marker != nullptr);
  // ind + 2 magnitude bits + sign on top of the marker symbol's refill.
  CHECK(bits[1] >= 4u);
  CHECK(bits[1] <= 4u + kTableLog);

  residual(0, 0, 1) = bound + kMaxEscapeExtra;
  CHECK(tans_decode_plane(tans_encode_plane(residual, sigma, model), sigma, model) == residual);
  residual(0, 0, 1) = -(bound + kMaxEscapeExtra + 1);
  CHECK_THROWS_AS(tans_encode_plane(residual, sigma, model), Error);
}

TEST_CASE("skip mode") {
  const TableSet& t = default_tables();
  const int32_t threshold = t.skip_ladder[1];
  const PlaneTensor sigma(4, 20, 20, threshold - 1);
  SUBCASE("all skipped") {
    const ResidualModel model = model_for(t, threshold);
    const PlaneTensor zero(sigma.shape());
    const auto bytes = tans_encode_plane(zero, sigma, model);
    CHECK(bytes.empty());
    DecodeStats stats;
    CHECK(tans_decode_plane(bytes, sigma, model, &stats) == zero);
    CHECK(stats.bits_read == 0);
    CHECK(stats.positions_skipped == zero.size());
    PlaneTensor bad = zero;
    bad(2, 3, 4) = 1;
    CHECK_THROWS_AS(tans_encode_plane(bad, sigma, model), Error);
  }
  SUBCASE("cube override decodes from bits") {
    CubeFlags cubes(sigma.shape());
    cubes.set(0, 17, 0);
    CHECK(cubes.cube_count() == 4);
    CHECK(cubes.set_count() == 1);
    const ResidualModel model = model_for(t, threshold, &cubes);
    PlaneTensor residual(sigma.shape());
    residual(3, 19, 5) = -2;
    residual(0, 16, 0) = 7;
    const auto bytes = tans_encode_plane(residual, sigma, model);
    CHECK_FALSE(bytes.empty());
    DecodeStats stats;
    CHECK(tans_decode_plane(bytes, sigma, model, &stats) == residual);
    // channels 0..3, rows 16..19, columns 0..15
    CHECK(stats.symbols_decoded == 4u * 4u * 16u);
    CHECK(stats.positions_skipped == sigma.size() - 256u);
  }
  SUBCASE("ladder") {
    CHECK(t.skip_ladder[0] == INT32_MIN);
    for (int k = 1; k < 8; ++k) CHECK(t.skip_ladder[static_cast<std::size_t>(k)] == t.sigma_edges[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("cube flag serialization") {
  const Shape3 shape{40, 33, 17};
  CubeFlags cubes(shape);
  CHECK(cubes.cube_count() == 3u * 3u * 2u);
  cubes.set(39, 32, 16);
  cubes.set(0, 0, 0);
  const auto bytes = cubes.serialize();
  CHECK(bytes.size() == cubes.byte_size());
  CHECK(CubeFlags::parse(shape, bytes) == cubes);
  auto padded = bytes;
  padded.back() |= 0x80;
  CHECK_THROWS_AS(CubeFlags::parse(shape, padded), FormatError);
  CHECK_THROWS_AS(CubeFlags::parse(shape, std::span<const uint8_t>(bytes).first(1)), FormatError);
}

TEST_CASE("sigma quantizer") {
  const SigmaQuantizer q;
  const auto edges = default_sigma_edges();
  CHECK(edges[0] == 1235);
  CHECK(edges[31] == 1235 + 11 * 31);
  CHECK(q.row(-5) == 0);
  CHECK(q.row(edges[1] - 1) == 0);
  CHECK(q.row(edges[1]) == 1);
  CHECK(q.row(edges[31]) == 31);
  CHECK(q.row(100000) == 31);
  std::array<int32_t, kResidualRows> bad = edges;
  bad[5] = bad[4];
  CHECK_THROWS_AS(SigmaQuantizer{bad}, Error);
}

TEST_CASE("random planes round trip") {
  const TableSet& t = default_tables();
  Rng rng(99);
  for (int n = 0; n < 600; ++n) {
    const int kind = n % 4;
    const ResidualModel model = model_for(t, kind >= 2 ? t.skip_ladder[1] : t.skip_ladder[n % 8 == 1 ? 0 : 3]);
    const RandomCase rc = random_case(rng, model, kind);
    const auto bytes = tans_encode_plane(rc.residual, rc.sigma, model);
    REQUIRE(tans_decode_plane(bytes, rc.sigma, model) == rc.residual);
  }
}

TEST_CASE("corrupted payloads fail cleanly") {
  const TableSet& t = default_tables();
  const ResidualModel model = model_for(t);
  Rng rng(5);
  int rejected = 0;
  for (int n = 0; n < 300; ++n) {
    const RandomCase rc = random_case(rng, model, 0);
    auto bytes = tans_encode_plane(rc.residual, rc.sigma, model);
    if (coin(rng)) {
      bytes.resize(bytes.size() / 2);
    } else {
      bytes.push_back(static_cast<uint8_t>(rng() | 1));
    }
    try {
      tans_decode_plane(bytes, rc.sigma, model);
    } catch (const FormatError&) {
      ++rejected;
    }
  }
  CHECK(rejected > 250);
}

TEST_CASE("hyper coding") {
  const TableSet& t = default_tables();
  CHECK(hyper_row(130) == 2);
  CHECK(hyper_row(127) == 127);
  CHECK(hyper_row(128) == 0);
  CHECK(encode_hyper(PlaneTensor(3, 0, 0), t.hyper_tans).empty());
  CHECK(decode_hyper({}, 3, 0, 0, t.hyper_tans).size() == 0);
  Rng rng(7);
  for (int n = 0; n < 50; ++n) {
    PlaneTensor z(uniform(rng, 1, 300), uniform(rng, 1, 5), uniform(rng, 1, 5));
    for (auto& v : z.data()) v = random_residual(rng, 2.0, 0.02, 1000);
    const auto bytes = encode_hyper(z, t.hyper_tans);
    CHECK(decode_hyper(bytes, z.channels(), z.height(), z.width(), t.hyper_tans) == z);
  }
}

TEST_CASE("row bands") {
  CHECK(band_rows(64, 4) == std::vector<int>{0, 16, 32, 48, 64});
  CHECK(band_rows(10, 1) == std::vector<int>{0, 10});
  CHECK(band_rows(3, 4) == std::vector<int>{0, 0, 1, 2, 3});
}

TEST_CASE("substream layout") {
  const std::vector<std::vector<uint8_t>> one{{1, 2, 3}};
  const auto block1 = join_substreams(one);
  CHECK(block1.size() == 4 + 3);
  const SubstreamLayout l1 = read_substream_layout(block1, 1);
  CHECK(l1.offsets == std::vector<uint32_t>{4});

  const std::vector<std::vector<uint8_t>> parts{{1}, {}, {2, 3}, {4}};
  const auto block = join_substreams(parts);
  const SubstreamLayout layout = read_substream_layout(block, 4);
  CHECK(layout.offsets == std::vector<uint32_t>{16, 17, 17, 19});
  const auto split = split_substreams(block, 4);
  REQUIRE(split.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::vector<uint8_t>(split[k].begin(), split[k].end()) == parts[k]);
  }

  auto decreasing = block;
  decreasing[4] = 18;  // second offset
  CHECK_THROWS_AS(read_substream_layout(decreasing, 4), FormatError);
  auto first_wrong = block;
  first_wrong[0] = 15;
  CHECK_THROWS_AS(read_substream_layout(first_wrong, 4), FormatError);
  auto overrun = block;
  overrun[12] = 200;
  CHECK_THROWS_AS(read_substream_layout(overrun, 4), FormatError);
  CHECK_THROWS_AS(read_substream_layout(std::span<const uint8_t>(block).first(7), 4), FormatError);
}

TEST_CASE("residual blocks: bands, partial decode, serial and parallel") {
  const TableSet& t = default_tables();
  const ResidualModel model = model_for(t, t.skip_ladder[1]);
  Rng rng(31);
  for (int n = 0; n < 40; ++n) {
    RandomCase rc = random_case(rng, model, n % 4);
    const int count = uniform(rng, 1, 8);
    const auto block = encode_residual_block(rc.residual, rc.sigma, model, count);
    DecodeStats serial_stats;
    DecodeStats parallel_stats;
    const PlaneTensor serial = decode_residual_block(block, rc.sigma, model, count, -1, Exec::kSerial, &serial_stats);
    const PlaneTensor parallel =
        decode_residual_block(block, rc.sigma, model, count, -1, Exec::kParallel, &parallel_stats);
    CHECK(serial == rc.residual);
    CHECK(parallel == serial);
    CHECK(serial_stats.bits_read == parallel_stats.bits_read);

    const int keep = uniform(rng, 0, count);
    const PlaneTensor partial = decode_residual_block(block, rc.sigma, model, count, keep, Exec::kParallel);
    const auto bands = band_rows(rc.residual.height(), count);
    for (int c = 0; c < partial.channels(); ++c) {
      for (int i = 0; i < partial.height(); ++i) {
        const bool kept = i < bands[static_cast<std::size_t>(keep)];
        for (int j = 0; j < partial.width(); ++j) {
          CHECK(partial(c, i, j) == (kept ? rc.residual(c, i, j) : 0));
        }
      }
    }
  }
}

TEST_CASE("substreams decode independently") {
  const TableSet& t = default_tables();
  const ResidualModel model = model_for(t);
  Rng rng(4);
  RandomCase rc = random_case(rng, model, 0);
  while (rc.residual.height() < 4) rc = random_case(rng, model, 0);
  const int count = 4;
  const auto block = encode_residual_block(rc.residual, rc.sigma, model, count);
  const auto parts = split_substreams(block, count);
  const auto bands = band_rows(rc.residual.height(), count);
  PlaneTensor out(rc.residual.shape());
  for (int k = count; k-- > 0;) {
    tans_decode_rows(parts[static_cast<std::size_t>(k)], rc.sigma, model, out, bands[static_cast<std::size_t>(k)],
                     bands[static_cast<std::size_t>(k) + 1]);
  }
  CHECK(out == rc.residual);
}

TEST_CASE("position bits attribution") {
  const TableSet& t = default_tables();
  const ResidualModel model = model_for(t, t.skip_ladder[2]);
  Rng rng(8);
  const RandomCase rc = random_case(rng, model, 3);
  const auto bytes = tans_encode_plane(rc.residual, rc.sigma, model);
  std::vector<uint32_t> bits(rc.residual.size(), 0);
  DecodeStats stats;
  stats.position_bits = &bits;
  tans_decode_plane(bytes, rc.sigma, model, &stats);
  uint64_t total = 0;
  for (int c = 0; c < rc.sigma.channels(); ++c) {
    for (int i = 0; i < rc.sigma.height(); ++i) {
      for (int j = 0; j < rc.sigma.width(); ++j) {
        const uint32_t b = bits[rc.sigma.index(c, i, j)];
        if (model.skipped(rc.sigma(c, i, j), c, i, j)) CHECK(b == 0);
        total += b;
      }
    }
  }
  if (!bytes.empty()) CHECK(total + 2 * kTableLog == stats.bits_read);
}
