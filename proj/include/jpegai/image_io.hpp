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

#include <string>
#include <string_view>

#include "jpegai/pipeline.hpp"

namespace jpegai {

// Binary PPM (P6) and PGM (P5). maxval must be 2^b - 1 for b in 8..16;
// samples wider than 8 bits are big-endian. A PGM loads as 4:2:0 YCbCr with
// mid-grey chroma.
Image read_pnm(const std::string& path);
Image parse_pnm(std::string_view bytes);
// RGB images are written as P6; YCbCr images as P5 of the luma plane.
void write_pnm(const std::string& path, const Image& image);
std::string format_pnm(const Image& image);

// Raw planar YCbCr: Y then Cb then Cr, one byte per sample at 8 bits and two
// little-endian bytes above. The geometry comes from a key=value text file
// with keys width, height, bitdepth and chroma (420, 422 or 444).
struct YuvDescriptor {
  int width = 0;
  int height = 0;
  int bitdepth = 8;
  int sub_v = 2;
  int sub_h = 2;
};

YuvDescriptor parse_yuv_descriptor(std::string_view text);
std::string format_yuv_descriptor(const YuvDescriptor& desc);
Image read_yuv(const std::string& path, const YuvDescriptor& desc);
void write_yuv(const std::string& path, const Image& image);
YuvDescriptor descriptor_of(const Image& image);

// Dispatch on the extension: .ppm/.pgm/.pnm or .yuv (descriptor at
// <path>.desc unless given).
Image read_image(const std::string& path, const std::string& yuv_descriptor_path = "");
// .yuv also writes <path>.desc.
void write_image(const std::string& path, const Image& image);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace jpegai
