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

#include "jpegai/container.hpp"

#include <array>
#include <cstdio>
#include <set>

#include "jpegai/error.hpp"

namespace jpegai {

bool is_marker_code(uint16_t code) { return (code & 0xfff0) == 0xff80; }

PayloadKind payload_kind(uint16_t code) {
  switch (code) {
    case marker::kSOC:
    case marker::kEOC:
      return PayloadKind::kNone;
    case marker::kPIH:
      return PayloadKind::kPictureHeader;
    case marker::kTOH:
      return PayloadKind::kToolsHeader;
    case marker::kRDI:
      return PayloadKind::kRenderingInfo;
    case marker::kSOZ:
      return PayloadKind::kHyperStreams;
    case marker::kSORp:
      return PayloadKind::kPrimaryResidual;
    case marker::kSORs:
      return PayloadKind::kSecondaryResidual;
    case marker::kSOQ:
      return PayloadKind::kQualityMap;
    case marker::kUDI:
      return PayloadKind::kUserDefined;
    default:
      return PayloadKind::kOpaque;
  }
}

bool is_known_marker(uint16_t code) { return is_marker_code(code) && payload_kind(code) != PayloadKind::kOpaque; }

bool carries_region_idx(uint16_t code) { return code == marker::kSORp || code == marker::kSORs; }

std::string marker_name(uint16_t code) {
  switch (code) {
    case marker::kSOC: return "SOC";
    case marker::kEOC: return "EOC";
    case marker::kPIH: return "PIH";
    case marker::kTOH: return "TOH";
    case marker::kRDI: return "RDI";
    case marker::kSOZ: return "SOZ";
    case marker::kSORp: return "SORp";
    case marker::kSORs: return "SORs";
    case marker::kSOQ: return "SOQ";
    case marker::kUDI: return "UDI";
    default: {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "0x%04x", code);
      return buf;
    }
  }
}

void append_varint(std::vector<uint8_t>& out, uint64_t value) {
  if (value > 0xffffffffull) throw Error("varint value out of range: " + std::to_string(value));
  do {
    uint8_t byte = value & 0x7f;
    value >>= 7;
    if (value != 0) byte |= 0x80;
    out.push_back(byte);
  } while (value != 0);
}

std::vector<uint8_t> encode_varint(uint64_t value) {
  std::vector<uint8_t> out;
  append_varint(out, value);
  return out;
}

uint32_t decode_varint(std::span<const uint8_t> bytes, std::size_t& pos, std::size_t base_offset) {
  const std::size_t start = pos;
  uint64_t value = 0;
  for (int shift = 0; shift < 35; shift += 7) {
    if (pos >= bytes.size()) throw FormatError("truncated length field", base_offset + pos);
    const uint8_t byte = bytes[pos++];
    value |= static_cast<uint64_t>(byte & 0x7f) << shift;
    if ((byte & 0x80) == 0) {
      if (byte == 0 && pos - start > 1) throw FormatError("non-canonical length field", base_offset + start);
      if (value > 0xffffffffull) throw FormatError("length field exceeds 32 bits", base_offset + start);
      return static_cast<uint32_t>(value);
    }
  }
  throw FormatError("length field longer than 5 bytes", base_offset + start);
}

void validate_segments(std::span<const Segment> segments, std::span<const SegmentRecord> records) {
  const auto at = [&](std::size_t k) {
    return k < records.size() ? records[k].offset : FormatError::kNoOffset;
  };
  if (segments.empty() || segments.front().marker != marker::kSOC) {
    throw FormatError("codestream must start with SOC", at(0));
  }
  if (segments.back().marker != marker::kEOC) throw FormatError("codestream must end with EOC", at(segments.size() - 1));
  if (segments.size() < 2 || segments[1].marker != marker::kPIH) {
    throw FormatError("PIH must immediately follow SOC", at(1));
  }

  std::array<int, 16> counts{};
  std::set<uint8_t> primary_regions;
  std::set<uint8_t> secondary_regions;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const Segment& s = segments[k];
    if (!is_marker_code(s.marker)) throw FormatError("invalid marker code " + marker_name(s.marker), at(k));
    ++counts[s.marker & 0x0f];
    if ((s.marker == marker::kSOC || s.marker == marker::kEOC) && !s.payload.empty()) {
      throw FormatError(marker_name(s.marker) + " must have an empty payload", at(k));
    }
    if ((s.marker == marker::kSOC && k != 0) || (s.marker == marker::kEOC && k + 1 != segments.size())) {
      throw FormatError(marker_name(s.marker) + " out of place", at(k));
    }
    if (carries_region_idx(s.marker) != s.region_idx.has_value()) {
      throw FormatError(marker_name(s.marker) + ": region_idx presence mismatch", at(k));
    }
    if (s.region_idx) {
      auto& seen = s.marker == marker::kSORp ? primary_regions : secondary_regions;
      if (!seen.insert(*s.region_idx).second) {
        throw FormatError("duplicate region_idx " + std::to_string(*s.region_idx) + " for " + marker_name(s.marker),
                          at(k));
      }
    }
  }
  const auto count = [&](uint16_t code) { return counts[code & 0x0f]; };
  if (count(marker::kPIH) != 1) throw FormatError("exactly one PIH segment is required");
  if (count(marker::kSOZ) != 1) throw FormatError("exactly one SOZ segment is required");
  if (count(marker::kSORp) < 1) throw FormatError("missing mandatory SORp segment");
  if (count(marker::kSORs) < 1) throw FormatError("missing mandatory SORs segment");
  if (count(marker::kTOH) > 1) throw FormatError("more than one TOH segment");
  if (count(marker::kSOQ) > 1) throw FormatError("more than one SOQ segment");
}

std::vector<uint8_t> write_codestream(std::span<const Segment> segments) {
  validate_segments(segments);
  std::vector<uint8_t> out;
  for (const Segment& s : segments) {
    out.push_back(static_cast<uint8_t>(s.marker >> 8));
    out.push_back(static_cast<uint8_t>(s.marker & 0xff));
    if (s.marker == marker::kSOC || s.marker == marker::kEOC) continue;
    const std::size_t length = s.payload.size() + (s.region_idx ? 1 : 0);
    append_varint(out, length);
    if (s.region_idx) out.push_back(*s.region_idx);
    out.insert(out.end(), s.payload.begin(), s.payload.end());
  }
  return out;
}

ParsedCodestream parse_codestream_detailed(std::span<const uint8_t> bytes) {
  if (bytes.empty()) throw FormatError("empty codestream", 0);
  ParsedCodestream parsed;
  std::size_t pos = 0;
  bool ended = false;
  while (pos < bytes.size()) {
    if (ended) throw FormatError("trailing bytes after EOC", pos);
    if (bytes.size() - pos < 2) throw FormatError("truncated marker", pos);
    SegmentRecord rec;
    rec.offset = pos;
    rec.marker = static_cast<uint16_t>((bytes[pos] << 8) | bytes[pos + 1]);
    if (!is_marker_code(rec.marker)) throw FormatError("expected marker, found " + marker_name(rec.marker), pos);
    if (parsed.segments.empty() && rec.marker != marker::kSOC) throw FormatError("codestream must start with SOC", pos);
    pos += 2;

    Segment seg;
    seg.marker = rec.marker;
    if (rec.marker != marker::kSOC && rec.marker != marker::kEOC) {
      rec.length = decode_varint(bytes, pos);
      rec.payload_offset = pos;
      if (bytes.size() - pos < rec.length) {
        throw FormatError(marker_name(rec.marker) + " payload truncated: declared " + std::to_string(rec.length) +
                              " bytes, " + std::to_string(bytes.size() - pos) + " available",
                          pos);
      }
      std::size_t body = pos;
      if (carries_region_idx(rec.marker)) {
        if (rec.length < 1) throw FormatError(marker_name(rec.marker) + " missing region_idx", pos);
        seg.region_idx = bytes[body++];
        rec.region_idx = seg.region_idx;
      }
      seg.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(body),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + rec.length));
      pos += rec.length;
    } else {
      rec.payload_offset = pos;
    }
    if (rec.marker == marker::kEOC) ended = true;
    parsed.segments.push_back(std::move(seg));
    parsed.records.push_back(rec);
  }
  if (!ended) throw FormatError("missing EOC", bytes.size());
  validate_segments(parsed.segments, parsed.records);
  return parsed;
}

std::vector<Segment> parse_codestream(std::span<const uint8_t> bytes) {
  return parse_codestream_detailed(bytes).segments;
}

const Segment* find_segment(std::span<const Segment> segments, uint16_t code) {
  for (const Segment& s : segments) {
    if (s.marker == code) return &s;
  }
  return nullptr;
}

std::vector<const Segment*> find_segments(std::span<const Segment> segments, uint16_t code) {
  std::vector<const Segment*> out;
  for (const Segment& s : segments) {
    if (s.marker == code) out.push_back(&s);
  }
  return out;
}

}  // namespace jpegai
