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

#include "jpegai/tables.hpp"

#include <fstream>
#include <iterator>

#include "jpegai/error.hpp"

namespace jpegai {
namespace {

constexpr char kMagic[4] = {'J', 'A', 'I', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    using U = std::make_unsigned_t<T>;
    const U u = static_cast<U>(v);
    for (std::size_t k = 0; k < sizeof(T); ++k) out.push_back(static_cast<uint8_t>(u >> (8 * k)));
  }
  template <typename T>
  void put_all(std::span<const T> values) {
    for (T v : values) put(v);
  }
  std::vector<uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) throw FormatError("table file truncated", pos_);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) u |= static_cast<U>(static_cast<U>(bytes_[pos_ + k]) << (8 * k));
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  template <typename T>
  void get_all(std::span<T> values) {
    for (T& v : values) v = get<T>();
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_cdf(Writer& w, const CdfTable& cdf) {
  w.put(static_cast<uint16_t>(cdf.rows));
  w.put(static_cast<uint16_t>(cdf.alphabet));
  w.put_all<uint16_t>(cdf.counts);
  w.put_all<uint16_t>(cdf.bounds);
}

CdfTable get_cdf(Reader& r, int rows, int alphabet) {
  const std::size_t at = r.pos();
  CdfTable cdf;
  cdf.rows = r.get<uint16_t>();
  cdf.alphabet = r.get<uint16_t>();
  if (cdf.rows != rows || cdf.alphabet != alphabet) throw FormatError("table file: unexpected CDF shape", at);
  cdf.counts.resize(static_cast<std::size_t>(rows) * alphabet);
  cdf.bounds.resize(rows);
  r.get_all<uint16_t>(cdf.counts);
  r.get_all<uint16_t>(cdf.bounds);
  try {
    cdf.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("table file: ") + e.what(), at);
  }
  return cdf;
}

}  // namespace

void TableSet::finalize() {
  residual_cdf.validate();
  hyper_cdf.validate();
  if (residual_cdf.rows != kResidualRows || residual_cdf.alphabet != kResidualAlphabet) {
    throw Error("residual CDF must be 32 x 256");
  }
  if (hyper_cdf.rows != kHyperRows || hyper_cdf.alphabet != kHyperAlphabet) throw Error("hyper CDF must be 128 x 64");
  const std::size_t rvs_size = static_cast<std::size_t>(kModelCount) * kRvsIds * kSigmaLevels;
  const std::size_t lsbs_size = static_cast<std::size_t>(kModelCount) * kSigmaLevels;
  if (rvs.t1.size() != rvs_size || rvs.t2.size() != rvs_size) throw Error("RVS tables have the wrong size");
  if (lsbs.tp.size() != lsbs_size || lsbs.tr.size() != lsbs_size) throw Error("LSBS tables have the wrong size");
  if (gain.m_inv.size() != static_cast<std::size_t>(kMLogLevels)) throw Error("m_inv table has the wrong size");
  for (const MInv& m : gain.m_inv) {
    if (m.mant < (uint64_t{1} << 62) || m.mant >= (uint64_t{1} << 63)) throw Error("m_inv mantissa not normalised");
  }
  for (const auto& model : gain.m_ref) {
    if (model[0].size() != 160 || model[1].size() != 96) throw Error("m_ref must have 160 + 96 entries per model");
  }
  residual_tans = build_tans_tables(residual_cdf);
  hyper_tans = build_tans_tables(hyper_cdf);
  quantizer = SigmaQuantizer(sigma_edges);
}

TableSet generate_default_tables() {
  TableSet t;
  t.residual_cdf = default_residual_cdf();
  t.hyper_cdf = default_hyper_cdf();
  t.sigma_edges = default_sigma_edges();
  t.skip_ladder = default_skip_ladder();
  t.rvs = generate_rvs_tables();
  t.lsbs = generate_lsbs_tables();
  t.gain = generate_gain_tables();
  t.finalize();
  return t;
}

const TableSet& default_tables() {
  static const TableSet tables = generate_default_tables();
  return tables;
}

std::vector<uint8_t> serialize_tables(const TableSet& t) {
  Writer w;
  for (char ch : kMagic) w.put(static_cast<uint8_t>(ch));
  w.put(kTableFileVersion);
  put_cdf(w, t.residual_cdf);
  put_cdf(w, t.hyper_cdf);
  w.put_all<int32_t>(t.sigma_edges);
  w.put_all<int32_t>(t.skip_ladder);
  w.put_all<int32_t>(t.rvs.t1);
  w.put_all<int32_t>(t.rvs.t2);
  w.put_all<int32_t>(t.lsbs.tp);
  w.put_all<int32_t>(t.lsbs.tr);
  for (const auto& model : t.gain.m_ref) {
    w.put_all<int16_t>(model[0]);
    w.put_all<int16_t>(model[1]);
  }
  w.put(t.gain.step);
  w.put(t.gain.sigma_precision);
  for (const MInv& m : t.gain.m_inv) {
    w.put(m.mant);
    w.put(m.shift);
  }
  return std::move(w.out);
}

TableSet parse_tables(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  for (char ch : kMagic) {
    if (r.get<uint8_t>() != static_cast<uint8_t>(ch)) throw FormatError("not a table file (bad magic)", 0);
  }
  const uint16_t version = r.get<uint16_t>();
  if (version != kTableFileVersion) throw FormatError("unsupported table file version " + std::to_string(version), 4);
  TableSet t;
  t.residual_cdf = get_cdf(r, kResidualRows, kResidualAlphabet);
  t.hyper_cdf = get_cdf(r, kHyperRows, kHyperAlphabet);
  r.get_all<int32_t>(t.sigma_edges);
  r.get_all<int32_t>(t.skip_ladder);
  const std::size_t rvs_size = static_cast<std::size_t>(kModelCount) * kRvsIds * kSigmaLevels;
  const std::size_t lsbs_size = static_cast<std::size_t>(kModelCount) * kSigmaLevels;
  t.rvs.t1.resize(rvs_size);
  t.rvs.t2.resize(rvs_size);
  t.lsbs.tp.resize(lsbs_size);
  t.lsbs.tr.resize(lsbs_size);
  r.get_all<int32_t>(t.rvs.t1);
  r.get_all<int32_t>(t.rvs.t2);
  r.get_all<int32_t>(t.lsbs.tp);
  r.get_all<int32_t>(t.lsbs.tr);
  for (auto& model : t.gain.m_ref) {
    model[0].resize(160);
    model[1].resize(96);
    r.get_all<int16_t>(model[0]);
    r.get_all<int16_t>(model[1]);
  }
  t.gain.step = r.get<int32_t>();
  t.gain.sigma_precision = r.get<int32_t>();
  t.gain.m_inv.resize(kMLogLevels);
  for (MInv& m : t.gain.m_inv) {
    m.mant = r.get<uint64_t>();
    m.shift = r.get<int16_t>();
  }
  if (!r.done()) throw FormatError("trailing bytes in table file", r.pos());
  try {
    t.finalize();
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("table file: ") + e.what());
  }
  return t;
}

void save_tables_file(const TableSet& tables, const std::string& path) {
  const auto bytes = serialize_tables(tables);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

TableSet load_tables_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open table file " + path);
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_tables(bytes);
}

}  // namespace jpegai
