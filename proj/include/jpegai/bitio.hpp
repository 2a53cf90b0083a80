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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace jpegai {

// MSB-first bit packing used by the picture and tools headers.
class BitWriter {
 public:
  void put(uint32_t value, int nbits);
  void put_flag(bool flag) { put(flag ? 1u : 0u, 1); }
  // Two's complement in nbits; throws if value does not fit.
  void put_signed(int32_t value, int nbits);
  // Pads with zero bits up to the next byte boundary.
  void align();
  void put_bytes(std::span<const uint8_t> bytes);

  std::size_t bit_count() const { return bytes_.size() * 8 - (pending_ ? 8 - pending_ : 0); }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take() {
    align();
    return std::move(bytes_);
  }

 private:
  std::vector<uint8_t> bytes_;
  int pending_ = 0;  // bits already used in the last byte (0 = aligned)
};

class BitReader {
 public:
  // base_offset is only used to report absolute positions in errors.
  explicit BitReader(std::span<const uint8_t> data, std::size_t base_offset = 0)
      : data_(data), base_(base_offset) {}

  uint32_t get(int nbits);
  bool get_flag() { return get(1) != 0; }
  int32_t get_signed(int nbits);
  void align();
  std::span<const uint8_t> get_bytes(std::size_t count);

  bool aligned() const { return (pos_ & 7) == 0; }
  std::size_t byte_position() const { return (pos_ + 7) >> 3; }
  std::size_t bits_left() const { return data_.size() * 8 - pos_; }

 private:
  std::span<const uint8_t> data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace jpegai
