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

#include <algorithm>
#include <bit>
#include <optional>
#include <string>

#include "jpegai/entropy.hpp"
#include "jpegai/error.hpp"

namespace jpegai {
namespace {

// Forward LSB-first bit sink. The stream is closed with a single '1' bit so
// the decoder can locate the end of the data inside the last byte.
class ForwardBitWriter {
 public:
  void put(uint32_t value, int nbits) {
    acc_ |= static_cast<uint64_t>(value) << fill_;
    fill_ += nbits;
    while (fill_ >= 8) {
      out_.push_back(static_cast<uint8_t>(acc_));
      acc_ >>= 8;
      fill_ -= 8;
    }
  }
  std::vector<uint8_t> finish() {
    put(1, 1);
    if (fill_ > 0) out_.push_back(static_cast<uint8_t>(acc_));
    acc_ = 0;
    fill_ = 0;
    return std::move(out_);
  }

 private:
  std::vector<uint8_t> out_;
  uint64_t acc_ = 0;
  int fill_ = 0;
};

// Reads the stream written by ForwardBitWriter from its end towards its
// start, so the most recently written bits come out first.
class BackwardBitReader {
 public:
  explicit BackwardBitReader(std::span<const uint8_t> data) : data_(data) {
    if (data.empty()) throw FormatError("entropy payload is empty");
    const uint8_t last = data.back();
    if (last == 0) throw FormatError("entropy payload has no terminator bit");
    pos_ = (data.size() - 1) * 8 + static_cast<std::size_t>(std::bit_width(last) - 1);
    start_ = pos_;
  }

  uint32_t get(int nbits) {
    if (static_cast<std::size_t>(nbits) > pos_) throw FormatError("entropy payload underrun");
    pos_ -= static_cast<std::size_t>(nbits);
    const std::size_t byte = pos_ >> 3;
    const std::size_t n = data_.size();
    uint32_t word = data_[byte];
    if (byte + 1 < n) word |= static_cast<uint32_t>(data_[byte + 1]) << 8;
    if (byte + 2 < n) word |= static_cast<uint32_t>(data_[byte + 2]) << 16;
    return (word >> (pos_ & 7)) & ((1u << nbits) - 1u);
  }

  std::size_t remaining() const { return pos_; }
  std::size_t consumed() const { return start_ - pos_; }

 private:
  std::span<const uint8_t> data_;
  std::size_t pos_ = 0;
  std::size_t start_ = 0;
};

constexpr int kGroupSize = 4;

struct CodedSymbol {
  int32_t value;
  uint16_t row;
};

std::vector<uint8_t> encode_symbols(const std::vector<CodedSymbol>& symbols, const TansTables& tables) {
  if (symbols.empty()) return {};
  ForwardBitWriter writer;
  uint32_t state[2] = {0, 0};
  const std::size_t n = symbols.size();
  const std::size_t groups = (n + kGroupSize - 1) / kGroupSize;

  struct Slot {
    int slot;
    bool escape;
    uint32_t extra;
    bool negative;
  };
  Slot slots[kGroupSize];

  for (std::size_t g = groups; g-- > 0;) {
    const int lane = static_cast<int>(g & 1);
    const std::size_t begin = g * kGroupSize;
    const std::size_t end = std::min(n, begin + kGroupSize);
    for (std::size_t t = begin; t < end; ++t) {
      const TansRow& row = tables.rows[symbols[t].row];
      const int32_t v = symbols[t].value;
      Slot& s = slots[t - begin];
      if (v > -row.bound && v <= -row.bound + row.active - 1) {
        s = Slot{v + row.bound, false, 0, false};
      } else {
        const int64_t magnitude = v < 0 ? -static_cast<int64_t>(v) : v;
        const int64_t extra = magnitude - row.bound;
        if (extra < 0 || extra > kMaxEscapeExtra) {
          throw Error("symbol " + std::to_string(v) + " is outside the escape range");
        }
        s = Slot{0, true, static_cast<uint32_t>(extra), v < 0};
      }
    }
    // Escape payloads, reversed: the decoder reads ind, magnitude, sign.
    for (std::size_t t = end; t-- > begin;) {
      const Slot& s = slots[t - begin];
      if (!s.escape) continue;
      const bool short_form = s.extra < (1u << kEscapeShortBits);
      writer.put(s.negative ? 1u : 0u, 1);
      writer.put(s.extra, short_form ? kEscapeShortBits : kEscapeLongBits);
      writer.put(short_form ? 1u : 0u, 1);
    }
    for (std::size_t t = end; t-- > begin;) {
      const TansRow& row = tables.rows[symbols[t].row];
      const int slot = slots[t - begin].slot;
      const uint32_t count = row.counts[slot];
      const uint32_t x = state[lane] + kStates;
      const int k = std::bit_width(count) - 1;
      int nbits = kTableLog - k;
      if ((x >> nbits) < count) --nbits;
      writer.put(x & ((1u << nbits) - 1u), nbits);
      state[lane] = row.encode[row.cumulative[slot] + (x >> nbits) - count];
    }
  }
  writer.put(state[1], kTableLog);
  writer.put(state[0], kTableLog);
  return writer.finish();
}

// Decodes one symbol at a time in the forward order used by the encoder.
class SymbolDecoder {
 public:
  SymbolDecoder(std::span<const uint8_t> bytes, const TansTables& tables, DecodeStats* stats)
      : bytes_(bytes), tables_(tables), stats_(stats) {}

  void decode(int row_index, int32_t* dst, uint32_t* bits_slot) {
    if (!reader_) start();
    const TansRow& row = tables_.rows[row_index];
    const DecodeEntry& e = row.decode[state_[lane_]];
    state_[lane_] = e.next | reader_->get(e.nbits);
    *dst = e.symbol;
    if (bits_slot) *bits_slot += e.nbits;
    if (e.symbol + row.bound == 0) pending_[npending_++] = Pending{dst, row.bound, bits_slot};
    ++symbols_;
    if (++in_group_ == kGroupSize) end_group();
  }

  void finish() {
    if (!reader_) {
      if (!bytes_.empty()) throw FormatError("entropy payload present but no symbols are coded");
      return;
    }
    end_group();
    if (reader_->remaining() != 0) throw FormatError("entropy payload has unused bits");
    if (stats_) {
      stats_->bits_read += reader_->consumed();
      stats_->symbols_decoded += symbols_;
      stats_->escapes += escapes_;
    }
  }

 private:
  struct Pending {
    int32_t* dst;
    int bound;
    uint32_t* bits_slot;
  };

  void start() {
    reader_.emplace(bytes_);
    state_[0] = reader_->get(kTableLog);
    state_[1] = reader_->get(kTableLog);
  }

  void end_group() {
    for (int k = 0; k < npending_; ++k) {
      const Pending& p = pending_[k];
      const bool short_form = reader_->get(1) != 0;
      const int m = short_form ? kEscapeShortBits : kEscapeLongBits;
      const int32_t extra = static_cast<int32_t>(reader_->get(m));
      const bool negative = reader_->get(1) != 0;
      *p.dst = negative ? -(p.bound + extra) : p.bound + extra;
      if (p.bits_slot) *p.bits_slot += static_cast<uint32_t>(m + 2);
    }
    escapes_ += static_cast<uint64_t>(npending_);
    npending_ = 0;
    in_group_ = 0;
    lane_ ^= 1;
  }

  std::span<const uint8_t> bytes_;
  const TansTables& tables_;
  DecodeStats* stats_;
  std::optional<BackwardBitReader> reader_;
  uint32_t state_[2] = {0, 0};
  int lane_ = 0;
  int in_group_ = 0;
  Pending pending_[kGroupSize];
  int npending_ = 0;
  uint64_t symbols_ = 0;
  uint64_t escapes_ = 0;
};

void check_model(const ResidualModel& model) {
  if (!model.tables || !model.quantizer) throw Error("residual model is missing its tables");
  if (model.tables->rows.size() < kResidualRows) throw Error("residual model needs 32 table rows");
}

void resolve_rows(const PlaneTensor& plane, int& row_begin, int& row_end) {
  if (row_end < 0) row_end = plane.height();
  if (row_begin < 0 || row_begin > row_end || row_end > plane.height()) throw Error("row window out of range");
}

}  // namespace

std::vector<uint8_t> tans_encode_plane(const PlaneTensor& residual, const PlaneTensor& sigma,
                                       const ResidualModel& model, int row_begin, int row_end) {
  check_model(model);
  require_same_shape(residual.shape(), sigma.shape(), "tans_encode_plane");
  resolve_rows(residual, row_begin, row_end);
  std::vector<CodedSymbol> symbols;
  for (int c = 0; c < residual.channels(); ++c) {
    for (int i = row_begin; i < row_end; ++i) {
      for (int j = 0; j < residual.width(); ++j) {
        const int32_t s = sigma(c, i, j);
        const int32_t v = residual(c, i, j);
        if (model.skipped(s, c, i, j)) {
          if (v != 0) {
            throw Error("non-zero residual at skipped position (" + std::to_string(c) + ", " + std::to_string(i) +
                        ", " + std::to_string(j) + ")");
          }
          continue;
        }
        symbols.push_back(CodedSymbol{v, static_cast<uint16_t>(model.quantizer->row(s))});
      }
    }
  }
  return encode_symbols(symbols, *model.tables);
}

void tans_decode_rows(std::span<const uint8_t> bytes, const PlaneTensor& sigma, const ResidualModel& model,
                      PlaneTensor& out, int row_begin, int row_end, DecodeStats* stats) {
  check_model(model);
  require_same_shape(out.shape(), sigma.shape(), "tans_decode_rows");
  resolve_rows(out, row_begin, row_end);
  SymbolDecoder decoder(bytes, *model.tables, stats);
  uint64_t skipped = 0;
  uint32_t* bits = stats && stats->position_bits ? stats->position_bits->data() : nullptr;
  if (bits && stats->position_bits->size() != out.size()) throw Error("position_bits has the wrong size");
  for (int c = 0; c < out.channels(); ++c) {
    for (int i = row_begin; i < row_end; ++i) {
      const std::size_t base = out.index(c, i, 0);
      const int32_t* srow = sigma.data().data() + base;
      int32_t* orow = out.data().data() + base;
      for (int j = 0; j < out.width(); ++j) {
        if (model.skipped(srow[j], c, i, j)) {
          orow[j] = 0;
          ++skipped;
          continue;
        }
        decoder.decode(model.quantizer->row(srow[j]), orow + j, bits ? bits + base + j : nullptr);
      }
    }
  }
  decoder.finish();
  if (stats) stats->positions_skipped += skipped;
}

PlaneTensor tans_decode_plane(std::span<const uint8_t> bytes, const PlaneTensor& sigma, const ResidualModel& model,
                              DecodeStats* stats) {
  PlaneTensor out(sigma.shape());
  tans_decode_rows(bytes, sigma, model, out, 0, sigma.height(), stats);
  return out;
}

int hyper_row(int channel) { return channel % kHyperRows; }

std::vector<uint8_t> encode_hyper(const PlaneTensor& z, const TansTables& tables) {
  if (tables.rows.size() != kHyperRows) throw Error("hyper coding needs 128 table rows");
  std::vector<CodedSymbol> symbols;
  symbols.reserve(z.size());
  for (int c = 0; c < z.channels(); ++c) {
    const auto row = static_cast<uint16_t>(hyper_row(c));
    for (int32_t v : z.plane(c)) symbols.push_back(CodedSymbol{v, row});
  }
  return encode_symbols(symbols, tables);
}

PlaneTensor decode_hyper(std::span<const uint8_t> bytes, int channels, int height, int width,
                         const TansTables& tables, DecodeStats* stats) {
  if (tables.rows.size() != kHyperRows) throw Error("hyper coding needs 128 table rows");
  PlaneTensor z(channels, height, width);
  SymbolDecoder decoder(bytes, tables, stats);
  for (int c = 0; c < channels; ++c) {
    const int row = hyper_row(c);
    for (int32_t& v : z.plane(c)) decoder.decode(row, &v, nullptr);
  }
  decoder.finish();
  return z;
}

}  // namespace jpegai
