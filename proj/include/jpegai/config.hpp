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

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jpegai/pipeline.hpp"

namespace jpegai {

// Settings shared by the library entry points and the command line.
struct PipelineConfig {
  EncodeConfig encode;
  DecodeOptions decode;
  std::string transform = "toy-haar";
  std::string tables_path;  // empty: built-in tables
  int threads = 0;          // 0: OpenMP default
  std::optional<int> quality_map;  // uniform Gain3d value, sized at encode time
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// One key=value per line; blank lines and lines starting with '#' are
// ignored.
ConfigEntries parse_config_text(std::string_view text);
ConfigEntries load_config_file(const std::string& path);

// Keys (values in parentheses):
//   transform (toy-haar)            tables (path)
//   model-id (0..3)                 beta (n or n,m)
//   tools (comma list of none, lsbs, lsbs-y, lsbs-uv, rvs, rvs-y, rvs-uv,
//          grfs, efe-linear, icci, efe-nonlinear, lef)
//   substreams (1..256)             decoder-id (0..2)
//   regions (comma list)            progressive (0..1)
//   threads (>= 0)                  chroma (420, 422, 444)
//   colour-transform (0..2)         color-variant (bt709, printed)
//   skip-threshold-idx (0..7)       region-size (HxW)
//   own-substream (bool)            tile-size (HxW)
//   predictor (none, neighbour-mean) phase-order (e.g. 00,11,01,10)
//   pad-to-64 (bool)                conceal (bool)
//   quality-map (integer)
// Throws Error on an unknown key or a malformed value.
void apply_config_entry(PipelineConfig& config, const std::string& key, const std::string& value);
void apply_config(PipelineConfig& config, const ConfigEntries& entries);

// Fills the uniform quality map for an image of height x width.
void finalize_for_image(PipelineConfig& config, int height, int width);

}  // namespace jpegai
