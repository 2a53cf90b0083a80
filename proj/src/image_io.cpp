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

#include "jpegai/image_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "jpegai/error.hpp"

namespace jpegai {
namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t k = 0; k < suffix.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + k])) != suffix[k]) return false;
  }
  return true;
}

int bitdepth_for_maxval(int maxval) {
  for (int b = 8; b <= 16; ++b) {
    if (maxval == (1 << b) - 1) return b;
  }
  throw FormatError("PNM maxval " + std::to_string(maxval) + " is not 2^b - 1 for b in 8..16");
}

// Header token reader that skips whitespace and comments.
class PnmHeader {
 public:
  explicit PnmHeader(std::string_view bytes) : bytes_(bytes) {}

  int number() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(bytes_.data() + start, bytes_.data() + pos_, value);
    if (ec != std::errc() || ptr == bytes_.data() + start) throw FormatError("PNM: expected a number", start);
    return value;
  }
  // Exactly one whitespace byte separates the header from the samples.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw FormatError("PNM: missing whitespace before the raster", pos_);
    }
    return pos_ + 1;
  }

 private:
  void skip() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

int parse_int(std::string_view text, const std::string& what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw Error(what + ": '" + std::string(text) + "' is not an integer");
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return data;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path + "'");
}

Image parse_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("not a binary PGM/PPM file", 0);
  }
  const bool colour = bytes[1] == '6';
  PnmHeader header(bytes);
  const int width = header.number();
  const int height = header.number();
  const int maxval = header.number();
  if (width < 1 || height < 1) throw FormatError("PNM: empty image");
  const int b = bitdepth_for_maxval(maxval);
  const std::size_t start = header.raster_start();
  const int planes = colour ? 3 : 1;
  const std::size_t bytes_per = b > 8 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * planes * bytes_per;
  if (bytes.size() - start < need) throw FormatError("PNM: truncated raster", bytes.size());
  Image img = colour ? make_image(ColorSpace::kRgb, height, width, b)
                     : make_image(ColorSpace::kYcbcr, height, width, b, 2, 2);
  const auto* p = reinterpret_cast<const uint8_t*>(bytes.data() + start);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      for (int c = 0; c < planes; ++c) {
        int v = *p++;
        if (bytes_per == 2) v = (v << 8) | *p++;
        if (v > maxval) throw FormatError("PNM: sample exceeds maxval");
        img.planes[c](0, i, j) = v;
      }
    }
  }
  if (!colour) {
    img.planes[1].fill(1 << (b - 1));
    img.planes[2].fill(1 << (b - 1));
  }
  return img;
}

Image read_pnm(const std::string& path) { return parse_pnm(read_file(path)); }

std::string format_pnm(const Image& image) {
  image.validate();
  const bool colour = image.space == ColorSpace::kRgb;
  const int planes = colour ? 3 : 1;
  std::string out = std::string(colour ? "P6" : "P5") + "\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n" + std::to_string((1 << image.bitdepth) - 1) + "\n";
  for (int i = 0; i < image.height(); ++i) {
    for (int j = 0; j < image.width(); ++j) {
      for (int c = 0; c < planes; ++c) {
        const int v = image.planes[c](0, i, j);
        if (image.bitdepth > 8) out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xff));
      }
    }
  }
  return out;
}

void write_pnm(const std::string& path, const Image& image) { write_file(path, format_pnm(image)); }

YuvDescriptor parse_yuv_descriptor(std::string_view text) {
  YuvDescriptor d;
  bool have_w = false;
  bool have_h = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw Error("YUV descriptor: expected key=value, got '" + std::string(l) + "'");
    const std::string key(trim(l.substr(0, eq)));
    const std::string_view value = trim(l.substr(eq + 1));
    if (key == "width") {
      d.width = parse_int(value, key);
      have_w = true;
    } else if (key == "height") {
      d.height = parse_int(value, key);
      have_h = true;
    } else if (key == "bitdepth") {
      d.bitdepth = parse_int(value, key);
    } else if (key == "chroma") {
      if (value == "420") {
        d.sub_v = d.sub_h = 2;
      } else if (value == "422") {
        d.sub_v = 1;
        d.sub_h = 2;
      } else if (value == "444") {
        d.sub_v = d.sub_h = 1;
      } else {
        throw Error("YUV descriptor: chroma must be 420, 422 or 444");
      }
    } else {
      throw Error("YUV descriptor: unknown key '" + key + "'");
    }
  }
  if (!have_w || !have_h || d.width < 1 || d.height < 1) throw Error("YUV descriptor: width and height are required");
  if (d.bitdepth < 8 || d.bitdepth > 16) throw Error("YUV descriptor: bitdepth must be 8..16");
  return d;
}

std::string format_yuv_descriptor(const YuvDescriptor& d) {
  const char* chroma = d.sub_v == 2 ? "420" : (d.sub_h == 2 ? "422" : "444");
  return "width=" + std::to_string(d.width) + "\nheight=" + std::to_string(d.height) +
         "\nbitdepth=" + std::to_string(d.bitdepth) + "\nchroma=" + chroma + "\n";
}

YuvDescriptor descriptor_of(const Image& image) {
  if (image.space != ColorSpace::kYcbcr) throw Error("raw YUV output needs a YCbCr image");
  if (image.sub_v == 2 && image.sub_h == 1) throw Error("raw YUV cannot describe 4:4:0 subsampling");
  return YuvDescriptor{image.width(), image.height(), image.bitdepth, image.sub_v, image.sub_h};
}

Image read_yuv(const std::string& path, const YuvDescriptor& d) {
  const std::string bytes = read_file(path);
  Image img = make_image(ColorSpace::kYcbcr, d.height, d.width, d.bitdepth, d.sub_v, d.sub_h);
  const std::size_t bytes_per = d.bitdepth > 8 ? 2 : 1;
  std::size_t need = 0;
  for (const auto& p : img.planes) need += p.size() * bytes_per;
  if (bytes.size() != need) {
    throw FormatError("YUV file is " + std::to_string(bytes.size()) + " bytes, descriptor implies " +
                      std::to_string(need));
  }
  const auto* p = reinterpret_cast<const uint8_t*>(bytes.data());
  for (auto& plane : img.planes) {
    for (int32_t& v : plane.data()) {
      v = *p++;
      if (bytes_per == 2) v |= *p++ << 8;
    }
  }
  img.validate();
  return img;
}

void write_yuv(const std::string& path, const Image& image) {
  descriptor_of(image);
  image.validate();
  std::string out;
  for (const auto& plane : image.planes) {
    for (int32_t v : plane.data()) {
      out.push_back(static_cast<char>(v & 0xff));
      if (image.bitdepth > 8) out.push_back(static_cast<char>(v >> 8));
    }
  }
  write_file(path, out);
}

Image read_image(const std::string& path, const std::string& yuv_descriptor_path) {
  if (ends_with(path, ".yuv")) {
    const std::string desc = yuv_descriptor_path.empty() ? path + ".desc" : yuv_descriptor_path;
    return read_yuv(path, parse_yuv_descriptor(read_file(desc)));
  }
  return read_pnm(path);
}

void write_image(const std::string& path, const Image& image) {
  if (ends_with(path, ".yuv")) {
    write_yuv(path, image);
    write_file(path + ".desc", format_yuv_descriptor(descriptor_of(image)));
    return;
  }
  if (image.space == ColorSpace::kYcbcr && ends_with(path, ".ppm")) {
    throw Error("a YCbCr picture cannot be written as PPM; use .yuv or .pgm");
  }
  write_pnm(path, image);
}

}  // namespace jpegai
