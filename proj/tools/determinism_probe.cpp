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

// Decodes a codestream and prints the SHA-256 of the decoded samples. Built
// once against the optimised library and once against the -O0 one.

#include <openssl/evp.h>

#include <cstdio>
#include <iostream>
#include <string>

#include "jpegai/error.hpp"
#include "jpegai/image_io.hpp"
#include "jpegai/pipeline.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: " << argv[0] << " codestream [serial]\n";
    return 1;
  }
  try {
    const std::string data = jpegai::read_file(argv[1]);
    jpegai::DecodeOptions options;
    if (argc > 2 && std::string(argv[2]) == "serial") options.exec = jpegai::Exec::kSerial;
    const jpegai::Image img = jpegai::decode(
        std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()), data.size()), options);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    for (const auto& plane : img.planes) {
      const int32_t dims[2] = {plane.height(), plane.width()};
      EVP_DigestUpdate(ctx, dims, sizeof dims);
      EVP_DigestUpdate(ctx, plane.data().data(), plane.data().size_bytes());
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int k = 0; k < len; ++k) {
      char buf[3];
      std::snprintf(buf, sizeof buf, "%02x", digest[k]);
      hex += buf;
    }
    std::cout << "sha256=" << hex << "\n";
  } catch (const jpegai::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
