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

#include "jpegai/bitio.hpp"

#include <string>

#include "jpegai/error.hpp"

namespace jpegai {

void BitWriter::put(uint32_t value, int nbits) {
  if (nbits < 0 || nbits > 32) throw Error("BitWriter::put: bad width");
  if (nbits < 32 && (value >> nbits) != 0) {
    throw Error("value " + std::to_string(value) + " does not fit in " + std::to_string(nbits) + " bits");
  }
  for (int b = nbits - 1; b >= 0; --b) {
    if (pending_ == 0) bytes_.push_back(0);
    const uint32_t bit = (value >> b) & 1u;
    bytes_.back() |= static_cast<uint8_t>(bit << (7 - pending_));
    pending_ = (pending_ + 1) & 7;
  }
}

void BitWriter::put_signed(int32_t value, int nbits) {
  const int64_t lo = -(int64_t{1} << (nbits - 1));
  const int64_t hi = (int64_t{1} << (nbits - 1)) - 1;
  if (value < lo || value > hi) {
    throw Error("signed value " + std::to_string(value) + " does not fit in " + std::to_string(nbits) + " bits");
  }
  const uint32_t mask = nbits == 32 ? 0xffffffffu : ((1u << nbits) - 1u);
  put(static_cast<uint32_t>(value) & mask, nbits);
}

void BitWriter::align() { pending_ = 0; }

void BitWriter::put_bytes(std::span<const uint8_t> bytes) {
  align();
  bytes_.insert(bytes_.end(), bytes.begin(), bytes.end());
}

uint32_t BitReader::get(int nbits) {
  if (nbits < 0 || nbits > 32) throw Error("BitReader::get: bad width");
  if (bits_left() < static_cast<std::size_t>(nbits)) {
    throw FormatError("header truncated", base_ + data_.size());
  }
  uint32_t v = 0;
  for (int b = 0; b < nbits; ++b) {
    const uint8_t byte = data_[pos_ >> 3];
    v = (v << 1) | ((byte >> (7 - (pos_ & 7))) & 1u);
    ++pos_;
  }
  return v;
}

int32_t BitReader::get_signed(int nbits) {
  const uint32_t raw = get(nbits);
  if (nbits == 32) return static_cast<int32_t>(raw);
  const uint32_t sign = 1u << (nbits - 1);
  return static_cast<int32_t>((raw ^ sign)) - static_cast<int32_t>(sign);
}

void BitReader::align() { pos_ = (pos_ + 7) & ~std::size_t{7}; }

std::span<const uint8_t> BitReader::get_bytes(std::size_t count) {
  align();
  const std::size_t at = pos_ >> 3;
  if (data_.size() - at < count) throw FormatError("header truncated", base_ + data_.size());
  pos_ += count * 8;
  return data_.subspan(at, count);
}

}  // namespace jpegai
