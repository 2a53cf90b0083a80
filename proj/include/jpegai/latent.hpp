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
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jpegai/exec.hpp"
#include "jpegai/tensor.hpp"

namespace jpegai {

inline constexpr int kMcmStages = 4;
inline constexpr int kConcatChannels = 256;
inline constexpr int kPredictionGroups = 4;

// r = round(y - p), half away from zero.
PlaneTensor quantize_secondary_residual(const RealTensor& y, const RealTensor& p);
// y = r + p.
PlaneTensor reconstruct_secondary(const PlaneTensor& r, const PlaneTensor& p);

// Channels 0..95 from the secondary latent, 96..255 from the primary one.
PlaneTensor concat_latents(const PlaneTensor& secondary, const PlaneTensor& primary);
// Aligns the primary latent to a chroma grid subsampled by (cv, ch): mean of
// each cv x ch cell (partial cells at the edge use the samples they have),
// rounded half away from zero.
PlaneTensor pool_to_chroma_grid(const PlaneTensor& primary, int cv, int ch, int out_h, int out_w);

using Phase = std::pair<int, int>;  // (i mod 2, j mod 2)
using PhaseOrder = std::array<Phase, kMcmStages>;
inline constexpr PhaseOrder kDefaultPhaseOrder = {Phase{0, 0}, Phase{1, 1}, Phase{0, 1}, Phase{1, 0}};

struct McmSchedule {
  int height = 0;
  int width = 0;
  PhaseOrder order = kDefaultPhaseOrder;
  std::vector<uint8_t> stage;                          // per (i, j), row-major
  std::array<std::vector<int>, kMcmStages> positions;  // flat i * width + j

  int stage_of(int i, int j) const { return stage[static_cast<std::size_t>(i) * width + j]; }
};

McmSchedule mcm_schedule(int height, int width, const PhaseOrder& order = kDefaultPhaseOrder);

struct McmContext {
  const PlaneTensor& y;                 // current reconstruction; valid where reconstructed
  std::span<const uint8_t> reconstructed;  // per (i, j)
  int stage;
  const PlaneTensor& prediction;        // 640 x ceil(h/2) x ceil(w/2)
  const McmSchedule& schedule;
  std::span<const int> region_labels;   // per (i, j); empty when unrestricted
  Exec exec;

  // p for position (c, i, j) from the group of its own stage.
  int32_t prediction_at(int c, int i, int j) const {
    return prediction(schedule.stage_of(i, j) * (prediction.channels() / kPredictionGroups) + c, i >> 1, j >> 1);
  }
};

// Writes refinements for the current stage into `out` (zero on entry).
// Writing anywhere outside the stage is an error.
using McmPredictor = std::function<void(const McmContext&, PlaneTensor& out)>;

McmPredictor null_predictor();
// Mean of (y - p) over reconstructed 3x3 neighbours in the same region.
McmPredictor neighbour_mean_predictor();
// Looks up a predictor by name ("none" or "neighbour-mean").
McmPredictor predictor_by_name(const std::string& name);

// y = r + p_group(stage) + refinement, stage by stage. `residual` is in
// latent units, C channels; `prediction` has 4*C channels at half
// resolution.
PlaneTensor mcm_reconstruct(const PlaneTensor& residual, const PlaneTensor& prediction, const McmPredictor& predictor,
                            const McmSchedule& schedule, std::span<const int> region_labels = {},
                            Exec exec = Exec::kParallel);

// Encoder mirror of mcm_reconstruct. For each position in schedule order the
// callback receives the target t = y - p - refinement and returns the
// reconstructed residual in latent units; it records the coded value itself
// and may be called concurrently for distinct positions.
using McmQuantizer = std::function<int32_t(int c, int i, int j, int32_t target)>;
PlaneTensor mcm_encode(const PlaneTensor& y, const PlaneTensor& prediction, const McmPredictor& predictor,
                       const McmSchedule& schedule, const McmQuantizer& quantize,
                       std::span<const int> region_labels = {}, Exec exec = Exec::kParallel);

}  // namespace jpegai
