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

#include <string>

#include "jpegai/entropy.hpp"
#include "jpegai/error.hpp"

namespace jpegai {
namespace {

constexpr std::size_t kOffsetBytes = 4;

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<uint8_t>(v >> (8 * k)));
}

uint32_t get_u32le(std::span<const uint8_t> bytes, std::size_t pos) {
  return static_cast<uint32_t>(bytes[pos]) | static_cast<uint32_t>(bytes[pos + 1]) << 8 |
         static_cast<uint32_t>(bytes[pos + 2]) << 16 | static_cast<uint32_t>(bytes[pos + 3]) << 24;
}

}  // namespace

std::vector<int> band_rows(int height, int count) {
  if (count < 1) throw Error("substream count must be at least 1");
  if (height < 0) throw Error("negative band height");
  std::vector<int> b(static_cast<std::size_t>(count) + 1);
  for (int k = 0; k <= count; ++k) b[k] = static_cast<int>(static_cast<int64_t>(k) * height / count);
  return b;
}

std::vector<uint8_t> join_substreams(std::span<const std::vector<uint8_t>> parts) {
  if (parts.empty()) throw Error("substream block needs at least one part");
  std::vector<uint8_t> out;
  uint64_t offset = kOffsetBytes * parts.size();
  for (const auto& part : parts) {
    if (offset > UINT32_MAX) throw Error("substream block exceeds 4 GiB");
    put_u32le(out, static_cast<uint32_t>(offset));
    offset += part.size();
  }
  for (const auto& part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

SubstreamLayout read_substream_layout(std::span<const uint8_t> block, int count, std::size_t base_offset) {
  if (count < 1) throw Error("substream count must be at least 1");
  const std::size_t table = kOffsetBytes * static_cast<std::size_t>(count);
  if (block.size() < table) throw FormatError("substream offset table truncated", base_offset + block.size());
  SubstreamLayout layout;
  layout.count = count;
  layout.offsets.resize(count);
  for (int k = 0; k < count; ++k) {
    const uint32_t off = get_u32le(block, kOffsetBytes * k);
    const std::size_t where = base_offset + kOffsetBytes * k;
    if (k == 0 && off != table) throw FormatError("first substream offset does not follow the offset table", where);
    if (k > 0 && off < layout.offsets[k - 1]) throw FormatError("substream offsets decrease", where);
    if (off > block.size()) throw FormatError("substream offset beyond payload end", where);
    layout.offsets[k] = off;
  }
  return layout;
}

std::vector<std::span<const uint8_t>> split_substreams(std::span<const uint8_t> block, int count,
                                                       std::size_t base_offset) {
  const SubstreamLayout layout = read_substream_layout(block, count, base_offset);
  std::vector<std::span<const uint8_t>> parts(count);
  for (int k = 0; k < count; ++k) {
    const std::size_t begin = layout.offsets[k];
    const std::size_t end = k + 1 < count ? layout.offsets[k + 1] : block.size();
    parts[k] = block.subspan(begin, end - begin);
  }
  return parts;
}

std::vector<uint8_t> encode_residual_block(const PlaneTensor& residual, const PlaneTensor& sigma,
                                           const ResidualModel& model, int count) {
  const auto bands = band_rows(residual.height(), count);
  std::vector<std::vector<uint8_t>> parts(count);
  for (int k = 0; k < count; ++k) parts[k] = tans_encode_plane(residual, sigma, model, bands[k], bands[k + 1]);
  return join_substreams(parts);
}

PlaneTensor decode_residual_block(std::span<const uint8_t> block, const PlaneTensor& sigma,
                                  const ResidualModel& model, int count, int keep, Exec exec,
                                  DecodeStats* stats, std::size_t base_offset) {
  const auto parts = split_substreams(block, count, base_offset);
  const auto layout = read_substream_layout(block, count, base_offset);
  const auto bands = band_rows(sigma.height(), count);
  const int n = keep < 0 ? count : std::min(keep, count);
  PlaneTensor out(sigma.shape());
  std::vector<DecodeStats> part_stats(n);
  std::vector<std::string> errors(n);
  std::vector<std::size_t> error_offsets(n, FormatError::kNoOffset);
  std::vector<uint8_t> format_error(n, 0);
  if (stats && stats->position_bits) {
    for (auto& ps : part_stats) ps.position_bits = stats->position_bits;
  }

  // Bands touch disjoint rows of `out`, so parts can be decoded in any order.
  auto run = [&](int k) {
    try {
      tans_decode_rows(parts[k], sigma, model, out, bands[k], bands[k + 1], &part_stats[k]);
    } catch (const FormatError& e) {
      errors[k] = e.what();
      format_error[k] = 1;
      error_offsets[k] = base_offset + layout.offsets[k];
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) run(k);
  } else {
    for (int k = 0; k < n; ++k) run(k);
  }
  for (int k = 0; k < n; ++k) {
    if (errors[k].empty()) continue;
    const std::string what = "substream " + std::to_string(k) + ": " + errors[k];
    if (format_error[k]) throw FormatError(what, error_offsets[k]);
    throw Error(what);
  }
  if (stats) {
    for (const auto& ps : part_stats) stats->merge(ps);
  }
  return out;
}

}  // namespace jpegai
