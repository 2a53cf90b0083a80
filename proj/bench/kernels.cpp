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
// Serial against OpenMP execution of the decoder kernels. The second
// argument selects the mode: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "jpegai/entropy.hpp"
#include "jpegai/latent.hpp"
#include "jpegai/pixel.hpp"
#include "jpegai/scaling.hpp"
#include "jpegai/tables.hpp"
#include "jpegai/transform.hpp"
#include "support/generators.hpp"

using namespace jpegai;
using namespace jpegai::testing;

namespace {

Exec mode(const benchmark::State& state) { return state.range(1) != 0 ? Exec::kParallel : Exec::kSerial; }

void label(benchmark::State& state, std::size_t items) {
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(items));
  state.SetLabel(state.range(1) != 0 ? "openmp" : "serial");
}

// Latent grid side n: a 16n x 16n picture.
Shape3 luma(int n) { return {kPrimaryChannels, n, n}; }

void BM_DecodeResidualBlock(benchmark::State& state) {
  const TableSet& t = default_tables();
  const ResidualModel model{&t.residual_tans, &t.quantizer, t.skip_ladder[1], nullptr};
  Rng rng(1);
  const int n = static_cast<int>(state.range(0));
  const PlaneTensor sigma = random_plane(rng, luma(n), 1400, 2600);
  PlaneTensor residual(sigma.shape());
  for (auto& v : residual.data()) v = random_residual(rng, 2.0, 0.002, 200);
  constexpr int kSubstreams = 8;
  const auto block = encode_residual_block(residual, sigma, model, kSubstreams);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_residual_block(block, sigma, model, kSubstreams, -1, mode(state)));
  }
  label(state, sigma.size());
}

void BM_AverageVariance(benchmark::State& state) {
  Rng rng(2);
  const PlaneTensor sigma = random_plane(rng, luma(static_cast<int>(state.range(0))), 0, kSigmaLevels - 1);
  for (auto _ : state) benchmark::DoNotOptimize(average_variance(sigma, mode(state)));
  label(state, sigma.size());
}

void BM_RvsResidual(benchmark::State& state) {
  const TableSet& t = default_tables();
  Rng rng(3);
  const PlaneTensor sigma = random_plane(rng, luma(static_cast<int>(state.range(0))), 0, kSigmaLevels - 1);
  const PlaneTensor pooled = average_variance(sigma, Exec::kSerial);
  const PlaneTensor r = random_plane(rng, sigma.shape(), -4000, 4000);
  const std::vector<int> ids(kPrimaryChannels, 2);
  for (auto _ : state) {
    PlaneTensor x = r;
    rvs_apply_residual(x, pooled, t.rvs, 1, ids, mode(state));
    benchmark::DoNotOptimize(x);
  }
  label(state, sigma.size());
}

void BM_Lsbs(benchmark::State& state) {
  const TableSet& t = default_tables();
  Rng rng(4);
  const PlaneTensor sigma = random_plane(rng, luma(static_cast<int>(state.range(0))), 0, kSigmaLevels - 1);
  const PlaneTensor pooled = average_variance(sigma, Exec::kSerial);
  const PlaneTensor r = random_plane(rng, sigma.shape(), -4000, 4000);
  const PlaneTensor y = random_plane(rng, sigma.shape(), -8000, 8000);
  for (auto _ : state) benchmark::DoNotOptimize(lsbs_apply(y, r, pooled, t.lsbs, 3, mode(state)));
  label(state, sigma.size());
}

void BM_McmReconstruct(benchmark::State& state) {
  Rng rng(5);
  const int n = static_cast<int>(state.range(0));
  const PlaneTensor r = random_plane(rng, luma(n), -300, 300);
  const PlaneTensor p = random_plane(rng, {kPredictionGroups * kPrimaryChannels, (n + 1) / 2, (n + 1) / 2}, -500, 500);
  const McmSchedule schedule = mcm_schedule(n, n);
  const McmPredictor predictor = neighbour_mean_predictor();
  for (auto _ : state) benchmark::DoNotOptimize(mcm_reconstruct(r, p, predictor, schedule, {}, mode(state)));
  label(state, r.size());
}

void BM_Synthesis(benchmark::State& state) {
  Rng rng(6);
  const int n = static_cast<int>(state.range(0));
  const PlaneTensor picture = random_plane(rng, {1, 16 * n, 16 * n}, 0, 255);
  const PlaneTensor latent = analysis(picture, 8, kLumaChannels, Exec::kSerial);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesis(latent, 1, 16 * n, 16 * n, 8, 0, 0, mode(state)));
  }
  label(state, picture.size());
}

void BM_ConvertColor(benchmark::State& state) {
  Rng rng(7);
  const int n = 16 * static_cast<int>(state.range(0));
  RealTensor ycc(3, n, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : ycc.data()) v = u(rng);
  const ColorTransform fixed{};
  for (auto _ : state) benchmark::DoNotOptimize(convert_color(ycc, fixed, mode(state)));
  label(state, ycc.size() / 3);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {16, 64}) {
    for (int parallel : {0, 1}) b->Args({n, parallel});
  }
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_DecodeResidualBlock)->Apply(sizes);
BENCHMARK(BM_AverageVariance)->Apply(sizes);
BENCHMARK(BM_RvsResidual)->Apply(sizes);
BENCHMARK(BM_Lsbs)->Apply(sizes);
BENCHMARK(BM_McmReconstruct)->Apply(sizes);
BENCHMARK(BM_Synthesis)->Apply(sizes);
BENCHMARK(BM_ConvertColor)->Apply(sizes);

BENCHMARK_MAIN();
