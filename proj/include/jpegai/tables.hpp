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
#include <span>
#include <string>
#include <vector>

#include "jpegai/entropy.hpp"
#include "jpegai/scaling.hpp"

namespace jpegai {

inline constexpr uint16_t kTableFileVersion = 1;

// Every table the encoder and decoder must agree on. The first block is what
// the sidecar file stores; the rest is derived by finalize().
struct TableSet {
  CdfTable residual_cdf;
  CdfTable hyper_cdf;
  std::array<int32_t, kResidualRows> sigma_edges{};
  std::array<int32_t, 8> skip_ladder{};
  RvsTables rvs;
  LsbsTables lsbs;
  GainTables gain;

  TansTables residual_tans;
  TansTables hyper_tans;
  SigmaQuantizer quantizer;

  // Validates shapes and builds the derived tables.
  void finalize();
};

TableSet generate_default_tables();
// Built once per process.
const TableSet& default_tables();

std::vector<uint8_t> serialize_tables(const TableSet& tables);
TableSet parse_tables(std::span<const uint8_t> bytes);
void save_tables_file(const TableSet& tables, const std::string& path);
TableSet load_tables_file(const std::string& path);

}  // namespace jpegai
