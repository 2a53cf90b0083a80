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

#include <cmath>
#include <cstdint>
#include <random>

#include "jpegai/entropy.hpp"
#include "jpegai/tables.hpp"

namespace jpegai::bench {

// Deterministic residual plane for entropy throughput runs: every position
// is coded, sigma sweeps the residual rows and values follow a rounded
// Laplacian of matching scale.
struct SymbolStream {
  PlaneTensor residual;
  PlaneTensor sigma;
};

inline SymbolStream make_symbol_stream(int channels, int height, int width, uint32_t seed = 7) {
  SymbolStream s{PlaneTensor(channels, height, width), PlaneTensor(channels, height, width)};
  std::mt19937 rng(seed);
  const auto edges = default_sigma_edges();
  const auto bins = residual_sigma_bins();
  for (int c = 0; c < channels; ++c) {
    const int row = 4 + c % (kResidualRows - 8);
    std::exponential_distribution<double> mag(1.0 / bins[row]);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        s.sigma(c, i, j) = edges[row];
        const double v = std::round(mag(rng));
        s.residual(c, i, j) = static_cast<int32_t>(rng() & 1 ? v : -v);
      }
    }
  }
  return s;
}

inline ResidualModel stream_model(const TableSet& tables) {
  return ResidualModel{&tables.residual_tans, &tables.quantizer, INT32_MIN, nullptr};
}

}  // namespace jpegai::bench
