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
#include <limits>
#include <stdexcept>
#include <string>

namespace jpegai {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated codestream / table data. Carries the byte offset
// at which the problem was detected when one is known.
class FormatError : public Error {
 public:
  static constexpr std::size_t kNoOffset = std::numeric_limits<std::size_t>::max();

  explicit FormatError(const std::string& what, std::size_t offset = kNoOffset)
      : Error(offset == kNoOffset ? what : what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }
  bool has_offset() const { return offset_ != kNoOffset; }

 private:
  std::size_t offset_;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace jpegai
