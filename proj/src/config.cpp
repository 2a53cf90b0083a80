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

#include "jpegai/config.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "jpegai/error.hpp"
#include "jpegai/image_io.hpp"
#include "jpegai/transform.hpp"

namespace jpegai {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int to_int(const std::string& key, std::string_view text, int lo, int hi) {
  int v = 0;
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(key + ": '" + std::string(text) + "' is not an integer");
  }
  if (v < lo || v > hi) throw Error(key + ": " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(key + ": '" + v + "' is not a boolean");
}

std::pair<int, int> to_size(const std::string& key, const std::string& v) {
  const auto x = v.find('x');
  if (x == std::string::npos) throw Error(key + ": expected HxW");
  return {to_int(key, std::string_view(v).substr(0, x), 1, 65535), to_int(key, std::string_view(v).substr(x + 1), 1, 65535)};
}

void apply_tools(PipelineConfig& cfg, const std::string& value) {
  EncodeConfig& e = cfg.encode;
  e.tools = ToolsHeader{};
  e.rvs_enable = {};
  e.grfs_enable = {};
  for (const std::string& t : split(value, ',')) {
    if (t == "none" || t.empty()) continue;
    if (t == "lsbs") {
      e.tools.lsbs_enable_flag = {true, true};
    } else if (t == "lsbs-y") {
      e.tools.lsbs_enable_flag[0] = true;
    } else if (t == "lsbs-uv") {
      e.tools.lsbs_enable_flag[1] = true;
    } else if (t == "rvs") {
      e.rvs_enable = {true, true};
    } else if (t == "rvs-y") {
      e.rvs_enable[0] = true;
    } else if (t == "rvs-uv") {
      e.rvs_enable[1] = true;
    } else if (t == "grfs") {
      // Finest bands get the stronger table.
      e.grfs_enable = {true, true};
      for (int c = 0; c < kLumaChannels; ++c) e.grfs_y[c] = c >= 64 ? 1 : 0;
      for (int c = 0; c < kChromaChannels; ++c) e.grfs_uv[c] = c % kChromaPlaneChannels >= 16 ? 1 : 0;
    } else if (t == "efe-linear") {
      e.tools.efe_linear.enabled = true;
    } else if (t == "icci") {
      e.tools.icci.enabled = true;
    } else if (t == "efe-nonlinear") {
      e.tools.efe_nonlinear.enabled = true;
    } else if (t == "lef") {
      e.tools.lef.enabled = true;
    } else {
      throw Error("tools: unknown tool '" + t + "'");
    }
  }
}

}  // namespace

ConfigEntries parse_config_text(std::string_view text) {
  ConfigEntries out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw Error("config line " + std::to_string(number) + ": expected key=value");
    out.emplace_back(std::string(trim(l.substr(0, eq))), std::string(trim(l.substr(eq + 1))));
  }
  return out;
}

ConfigEntries load_config_file(const std::string& path) { return parse_config_text(read_file(path)); }

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  EncodeConfig& e = cfg.encode;
  DecodeOptions& d = cfg.decode;
  if (key == "transform") {
    transform_by_name(value);
    cfg.transform = value;
  } else if (key == "tables") {
    cfg.tables_path = value;
  } else if (key == "model-id") {
    e.model_id = to_int(key, value, 0, 3);
  } else if (key == "beta") {
    const auto parts = split(value, ',');
    if (parts.size() > 2) throw Error("beta: expected n or n,m");
    e.beta[0] = to_int(key, parts[0], -2048, 2047);
    e.beta[1] = parts.size() == 2 ? to_int(key, parts[1], -2048, 2047) : e.beta[0];
  } else if (key == "tools") {
    apply_tools(cfg, value);
  } else if (key == "substreams") {
    e.substream_count = to_int(key, value, 1, 256);
  } else if (key == "decoder-id") {
    d.decoder_id = to_int(key, value, 0, 2);
  } else if (key == "regions") {
    d.regions.clear();
    for (const std::string& r : split(value, ',')) {
      if (!r.empty()) d.regions.push_back(to_int(key, r, 0, 255));
    }
  } else if (key == "progressive") {
    double f = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), f);
    if (ec != std::errc() || ptr != value.data() + value.size() || !(f >= 0.0 && f <= 1.0)) {
      throw Error("progressive: expected a fraction in [0, 1]");
    }
    d.keep_fraction = f;
  } else if (key == "threads") {
    cfg.threads = to_int(key, value, 0, 4096);
  } else if (key == "chroma") {
    if (value == "420") {
      e.chroma_v = e.chroma_h = 2;
    } else if (value == "422") {
      e.chroma_v = 1;
      e.chroma_h = 2;
    } else if (value == "444") {
      e.chroma_v = e.chroma_h = 1;
    } else {
      throw Error("chroma: expected 420, 422 or 444");
    }
  } else if (key == "colour-transform") {
    e.colour_transform_idx = to_int(key, value, 0, 2);
  } else if (key == "color-variant") {
    d.color_variant = color_variant_by_name(value);
  } else if (key == "skip-threshold-idx") {
    e.skip_threshold_idx = to_int(key, value, 0, 7);
  } else if (key == "region-size") {
    const auto [h, w] = to_size(key, value);
    e.region_partitioning = true;
    e.region_height = h;
    e.region_width = w;
  } else if (key == "own-substream") {
    e.own_substream = to_bool(key, value);
  } else if (key == "tile-size") {
    const auto [h, w] = to_size(key, value);
    e.tile_enable = {true, true};
    e.tile_height = h;
    e.tile_width = w;
  } else if (key == "predictor") {
    predictor_by_name(value);
    e.predictor = d.predictor = value;
  } else if (key == "phase-order") {
    const auto parts = split(value, ',');
    if (parts.size() != kMcmStages) throw Error("phase-order: expected four phases");
    PhaseOrder order{};
    for (int s = 0; s < kMcmStages; ++s) {
      if (parts[s].size() != 2) throw Error("phase-order: phases are two digits");
      order[s] = {to_int(key, parts[s].substr(0, 1), 0, 1), to_int(key, parts[s].substr(1, 1), 0, 1)};
    }
    mcm_schedule(2, 2, order);
    e.phase_order = d.phase_order = order;
  } else if (key == "pad-to-64") {
    e.pad_to_64 = to_bool(key, value);
  } else if (key == "conceal") {
    d.conceal = to_bool(key, value);
  } else if (key == "quality-map") {
    cfg.quality_map = to_int(key, value, -2048, 2047);
  } else {
    throw Error("unknown config key '" + key + "'");
  }
}

void apply_config(PipelineConfig& config, const ConfigEntries& entries) {
  for (const auto& [k, v] : entries) apply_config_entry(config, k, v);
}

void finalize_for_image(PipelineConfig& config, int height, int width) {
  if (!config.quality_map) return;
  const int H = config.encode.pad_to_64 ? ceil_div(height, 64) * 64 : height;
  const int W = config.encode.pad_to_64 ? ceil_div(width, 64) * 64 : width;
  config.encode.gain3d = PlaneTensor(1, ceil_div(H, kLatentStride), ceil_div(W, kLatentStride), *config.quality_map);
}

}  // namespace jpegai
