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

#include "jpegai/latent.hpp"

#include <cmath>
#include <string>

#include "jpegai/error.hpp"

namespace jpegai {
namespace {

int32_t round_half_away(int64_t num, int64_t den) {
  const int64_t q = (2 * (num < 0 ? -num : num) + den) / (2 * den);
  return static_cast<int32_t>(num < 0 ? -q : q);
}

void check_prediction(const PlaneTensor& residual, const PlaneTensor& prediction) {
  if (prediction.channels() != kPredictionGroups * residual.channels() ||
      prediction.height() != ceil_div(residual.height(), 2) || prediction.width() != ceil_div(residual.width(), 2)) {
    throw Error("MCM prediction " + prediction.shape().str() + " does not match residual " + residual.shape().str());
  }
}

void check_refinement(const PlaneTensor& refinement, const McmSchedule& schedule, int stage) {
  const int C = refinement.channels();
  for (int c = 0; c < C; ++c) {
    const auto plane = refinement.plane(c);
    for (std::size_t k = 0; k < plane.size(); ++k) {
      if (plane[k] != 0 && schedule.stage[k] != stage) {
        throw Error("MCM predictor wrote outside stage " + std::to_string(stage) + " at position " +
                    std::to_string(k));
      }
    }
  }
}

// Shared stage loop of the decoder and the encoder.
template <typename Commit>
PlaneTensor run_stages(const Shape3& shape, const PlaneTensor& prediction, const McmPredictor& predictor,
                       const McmSchedule& schedule, std::span<const int> region_labels, Exec exec, Commit commit) {
  if (schedule.height != shape.height || schedule.width != shape.width) throw Error("MCM schedule size mismatch");
  if (!region_labels.empty() && region_labels.size() != shape.plane_size()) throw Error("MCM region labels size mismatch");
  PlaneTensor y(shape);
  std::vector<uint8_t> done(shape.plane_size(), 0);
  PlaneTensor refinement(shape);
  const int group_channels = prediction.channels() / kPredictionGroups;
  for (int s = 0; s < kMcmStages; ++s) {
    const auto& positions = schedule.positions[s];
    if (positions.empty()) continue;
    refinement.fill(0);
    const McmContext ctx{y, done, s, prediction, schedule, region_labels, exec};
    predictor(ctx, refinement);
    check_refinement(refinement, schedule, s);
    const int C = shape.channels;
    const auto npos = static_cast<int64_t>(positions.size());
    // Positions within a stage only read earlier stages.
#pragma omp parallel for if (exec == Exec::kParallel)
    for (int c = 0; c < C; ++c) {
      for (int64_t k = 0; k < npos; ++k) {
        const int flat = positions[k];
        const int i = flat / shape.width;
        const int j = flat % shape.width;
        const int32_t p =
            saturate_i32(int64_t{prediction(s * group_channels + c, i >> 1, j >> 1)} + refinement(c, i, j));
        y(c, i, j) = saturate_i32(int64_t{p} + commit(c, i, j, p));
      }
    }
    for (int flat : positions) done[flat] = 1;
  }
  return y;
}

}  // namespace

PlaneTensor quantize_secondary_residual(const RealTensor& y, const RealTensor& p) {
  require_same_shape(y.shape(), p.shape(), "quantize_secondary_residual");
  PlaneTensor r(y.shape());
  const auto ys = y.data();
  const auto ps = p.data();
  auto rs = r.data();
  for (std::size_t k = 0; k < ys.size(); ++k) rs[k] = static_cast<int32_t>(std::round(ys[k] - ps[k]));
  return r;
}

PlaneTensor reconstruct_secondary(const PlaneTensor& r, const PlaneTensor& p) {
  require_same_shape(r.shape(), p.shape(), "reconstruct_secondary");
  PlaneTensor y(r.shape());
  const auto rs = r.data();
  const auto ps = p.data();
  auto ys = y.data();
  for (std::size_t k = 0; k < rs.size(); ++k) ys[k] = saturate_i32(int64_t{rs[k]} + ps[k]);
  return y;
}

PlaneTensor concat_latents(const PlaneTensor& secondary, const PlaneTensor& primary) {
  if (secondary.height() != primary.height() || secondary.width() != primary.width()) {
    throw Error("concat_latents: spatial mismatch " + secondary.shape().str() + " vs " + primary.shape().str());
  }
  if (secondary.channels() + primary.channels() != kConcatChannels) {
    throw Error("concat_latents: expected 96 + 160 channels");
  }
  PlaneTensor out(kConcatChannels, primary.height(), primary.width());
  auto o = out.data();
  std::copy(secondary.data().begin(), secondary.data().end(), o.begin());
  std::copy(primary.data().begin(), primary.data().end(), o.begin() + static_cast<std::ptrdiff_t>(secondary.size()));
  return out;
}

PlaneTensor pool_to_chroma_grid(const PlaneTensor& primary, int cv, int ch, int out_h, int out_w) {
  if (cv < 1 || cv > 2 || ch < 1 || ch > 2) throw Error("pool_to_chroma_grid: factors must be 1 or 2");
  PlaneTensor out(primary.channels(), out_h, out_w);
  for (int c = 0; c < primary.channels(); ++c) {
    for (int i = 0; i < out_h; ++i) {
      for (int j = 0; j < out_w; ++j) {
        int64_t sum = 0;
        int n = 0;
        for (int di = 0; di < cv; ++di) {
          for (int dj = 0; dj < ch; ++dj) {
            const int si = i * cv + di;
            const int sj = j * ch + dj;
            if (si < primary.height() && sj < primary.width()) {
              sum += primary(c, si, sj);
              ++n;
            }
          }
        }
        out(c, i, j) = n ? round_half_away(sum, n) : 0;
      }
    }
  }
  return out;
}

McmSchedule mcm_schedule(int height, int width, const PhaseOrder& order) {
  if (height < 1 || width < 1) throw Error("mcm_schedule: grid must be at least 1x1");
  std::array<int, 4> stage_of_phase{-1, -1, -1, -1};
  for (int s = 0; s < kMcmStages; ++s) {
    const auto [pi, pj] = order[s];
    if (pi < 0 || pi > 1 || pj < 0 || pj > 1 || stage_of_phase[pi * 2 + pj] != -1) {
      throw Error("mcm_schedule: phase order must be a permutation of the four 2x2 phases");
    }
    stage_of_phase[pi * 2 + pj] = s;
  }
  McmSchedule sched;
  sched.height = height;
  sched.width = width;
  sched.order = order;
  sched.stage.resize(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const int s = stage_of_phase[(i & 1) * 2 + (j & 1)];
      sched.stage[static_cast<std::size_t>(i) * width + j] = static_cast<uint8_t>(s);
      sched.positions[s].push_back(i * width + j);
    }
  }
  return sched;
}

McmPredictor null_predictor() {
  return [](const McmContext&, PlaneTensor&) {};
}

McmPredictor neighbour_mean_predictor() {
  return [](const McmContext& ctx, PlaneTensor& out) {
    static constexpr int32_t kReciprocal[9] = {0, 65536, 32768, 21845, 16384, 13107, 10923, 9362, 8192};
    const McmSchedule& sched = ctx.schedule;
    const int H = sched.height;
    const int W = sched.width;
    const auto& positions = sched.positions[ctx.stage];
    const int C = ctx.y.channels();
    const auto npos = static_cast<int64_t>(positions.size());
#pragma omp parallel for if (ctx.exec == Exec::kParallel)
    for (int c = 0; c < C; ++c) {
      for (int64_t k = 0; k < npos; ++k) {
        const int flat = positions[k];
        const int i = flat / W;
        const int j = flat % W;
        const int label = ctx.region_labels.empty() ? 0 : ctx.region_labels[flat];
        int64_t sum = 0;
        int n = 0;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            const int ni = i + di;
            const int nj = j + dj;
            if (ni < 0 || nj < 0 || ni >= H || nj >= W) continue;
            const int nflat = ni * W + nj;
            if (!ctx.reconstructed[nflat]) continue;
            if (!ctx.region_labels.empty() && ctx.region_labels[nflat] != label) continue;
            sum += int64_t{ctx.y(c, ni, nj)} - ctx.prediction_at(c, ni, nj);
            ++n;
          }
        }
        if (n > 0) out(c, i, j) = saturate_i32((sum * kReciprocal[n] + 32768) >> 16);
      }
    }
  };
}

McmPredictor predictor_by_name(const std::string& name) {
  if (name == "none") return null_predictor();
  if (name == "neighbour-mean") return neighbour_mean_predictor();
  throw Error("unknown MCM predictor '" + name + "'");
}

PlaneTensor mcm_reconstruct(const PlaneTensor& residual, const PlaneTensor& prediction, const McmPredictor& predictor,
                            const McmSchedule& schedule, std::span<const int> region_labels, Exec exec) {
  check_prediction(residual, prediction);
  return run_stages(residual.shape(), prediction, predictor, schedule, region_labels, exec,
                    [&](int c, int i, int j, int32_t) { return residual(c, i, j); });
}

PlaneTensor mcm_encode(const PlaneTensor& y, const PlaneTensor& prediction, const McmPredictor& predictor,
                       const McmSchedule& schedule, const McmQuantizer& quantize, std::span<const int> region_labels,
                       Exec exec) {
  check_prediction(y, prediction);
  return run_stages(y.shape(), prediction, predictor, schedule, region_labels, exec,
                    [&](int c, int i, int j, int32_t p) { return quantize(c, i, j, saturate_i32(int64_t{y(c, i, j)} - p)); });
}

}  // namespace jpegai
