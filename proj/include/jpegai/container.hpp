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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jpegai {

// Marker codes. Every segment starts with one of these as a big-endian
// 16-bit value.
namespace marker {
inline constexpr uint16_t kSOC = 0xff80;   // start of codestream
inline constexpr uint16_t kEOC = 0xff81;   // end of codestream
inline constexpr uint16_t kPIH = 0xff82;   // picture header
inline constexpr uint16_t kTOH = 0xff83;   // tools header
inline constexpr uint16_t kRDI = 0xff84;   // rendering information
inline constexpr uint16_t kSOZ = 0xff88;   // hyper streams
inline constexpr uint16_t kSORp = 0xff89;  // primary residual stream
inline constexpr uint16_t kSORs = 0xff8a;  // secondary residual stream
inline constexpr uint16_t kSOQ = 0xff8b;   // quality map
inline constexpr uint16_t kUDI = 0xff8c;   // user defined information
}  // namespace marker

enum class PayloadKind {
  kNone,
  kPictureHeader,
  kToolsHeader,
  kRenderingInfo,
  kHyperStreams,
  kPrimaryResidual,
  kSecondaryResidual,
  kQualityMap,
  kUserDefined,
  kOpaque,  // reserved 0xff8x code, carried verbatim
};

bool is_marker_code(uint16_t code);  // anything in 0xff80..0xff8f
bool is_known_marker(uint16_t code);
bool carries_region_idx(uint16_t code);
PayloadKind payload_kind(uint16_t code);
std::string marker_name(uint16_t code);

struct Segment {
  uint16_t marker = 0;
  // Present exactly for SORp/SORs. Serialized as the first payload byte and
  // counted in the segment length.
  std::optional<uint8_t> region_idx;
  std::vector<uint8_t> payload;

  bool operator==(const Segment&) const = default;
};

// LEB128: 7 bits per byte, least significant group first, high bit set on
// every byte except the last. Values must be < 2^32; the encoding is
// canonical (at most 5 bytes, no redundant trailing zero groups).
std::vector<uint8_t> encode_varint(uint64_t value);
void append_varint(std::vector<uint8_t>& out, uint64_t value);
// Decodes at `pos` and advances it. Errors carry absolute offsets relative
// to `base_offset`.
uint32_t decode_varint(std::span<const uint8_t> bytes, std::size_t& pos, std::size_t base_offset = 0);

// Where each segment sits in the byte stream; used by inspection tools.
struct SegmentRecord {
  uint16_t marker = 0;
  std::size_t offset = 0;          // position of the marker
  std::size_t payload_offset = 0;  // first byte after the length field
  std::size_t length = 0;          // declared length (includes region_idx)
  std::optional<uint8_t> region_idx;
};

// Checks ordering and presence rules: SOC first, PIH second, EOC last,
// SOZ/SORp/SORs present, distinct region indices per residual marker,
// at most one TOH/SOQ, empty SOC/EOC payloads. When `records` is given the
// error carries the byte offset of the offending segment.
void validate_segments(std::span<const Segment> segments, std::span<const SegmentRecord> records = {});

std::vector<uint8_t> write_codestream(std::span<const Segment> segments);

struct ParsedCodestream {
  std::vector<Segment> segments;
  std::vector<SegmentRecord> records;
};

ParsedCodestream parse_codestream_detailed(std::span<const uint8_t> bytes);
std::vector<Segment> parse_codestream(std::span<const uint8_t> bytes);

// Convenience lookups over a parsed segment list.
const Segment* find_segment(std::span<const Segment> segments, uint16_t code);
std::vector<const Segment*> find_segments(std::span<const Segment> segments, uint16_t code);

}  // namespace jpegai
