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

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <climits>
#include <span>
#include <string>
#include <vector>

#include "jpegai/error.hpp"

namespace jpegai {

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool operator==(const Shape3&) const = default;

  std::string str() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
  }
};

// Axis-aligned rectangle on a 2-D grid, half-open on both axes.
struct Rect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  int bottom() const { return top + height; }
  int right() const { return left + width; }
  bool empty() const { return height <= 0 || width <= 0; }
  bool contains(int i, int j) const { return i >= top && i < bottom() && j >= left && j < right(); }
  std::size_t area() const {
    return empty() ? 0 : static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool operator==(const Rect&) const = default;
};

// Channel-major 3-D lattice (c, i, j). PlaneTensor is the integer variant used
// for latents, residuals, variances and hyper tensors.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int channels, int height, int width, T fill = T{})
      : shape_{channels, height, width}, data_(checked_size(channels, height, width), fill) {}
  explicit Tensor3(Shape3 shape, T fill = T{}) : Tensor3(shape.channels, shape.height, shape.width, fill) {}

  const Shape3& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int c, int i, int j) const {
    assert(c >= 0 && c < shape_.channels && i >= 0 && i < shape_.height && j >= 0 && j < shape_.width);
    return (static_cast<std::size_t>(c) * shape_.height + static_cast<std::size_t>(i)) * shape_.width +
           static_cast<std::size_t>(j);
  }

  T& operator()(int c, int i, int j) { return data_[index(c, i, j)]; }
  const T& operator()(int c, int i, int j) const { return data_[index(c, i, j)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  std::span<T> plane(int c) { return std::span<T>(data_).subspan(c * shape_.plane_size(), shape_.plane_size()); }
  std::span<const T> plane(int c) const {
    return std::span<const T>(data_).subspan(c * shape_.plane_size(), shape_.plane_size());
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Tensor3&) const = default;

 private:
  static std::size_t checked_size(int c, int h, int w) {
    if (c < 0 || h < 0 || w < 0) throw Error("negative tensor dimension");
    return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }

  Shape3 shape_;
  std::vector<T> data_;
};

using PlaneTensor = Tensor3<int32_t>;
using RealTensor = Tensor3<double>;

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

inline int32_t saturate_i32(int64_t v) {
  return v < INT32_MIN ? INT32_MIN : (v > INT32_MAX ? INT32_MAX : static_cast<int32_t>(v));
}

inline void require_same_shape(const Shape3& a, const Shape3& b, const char* what) {
  if (!(a == b)) throw Error(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
}

// Copies the rows/columns of `rect` from every channel.
template <typename T>
Tensor3<T> extract(const Tensor3<T>& src, const Rect& rect) {
  if (rect.top < 0 || rect.left < 0 || rect.bottom() > src.height() || rect.right() > src.width()) {
    throw Error("extract: rectangle outside the tensor");
  }
  Tensor3<T> out(src.channels(), rect.height, rect.width);
  if (rect.empty()) return out;
  for (int c = 0; c < src.channels(); ++c) {
    for (int i = 0; i < rect.height; ++i) {
      const T* from = &src(c, rect.top + i, rect.left);
      std::copy(from, from + rect.width, &out(c, i, 0));
    }
  }
  return out;
}

// Writes `patch` into `dst` with its top-left corner at (top, left).
template <typename T>
void insert(Tensor3<T>& dst, const Tensor3<T>& patch, int top, int left) {
  if (patch.channels() != dst.channels() || top < 0 || left < 0 || top + patch.height() > dst.height() ||
      left + patch.width() > dst.width()) {
    throw Error("insert: patch does not fit");
  }
  for (int c = 0; c < patch.channels(); ++c) {
    for (int i = 0; i < patch.height(); ++i) {
      if (patch.width() == 0) break;
      const T* from = &patch(c, i, 0);
      std::copy(from, from + patch.width(), &dst(c, top + i, left));
    }
  }
}

}  // namespace jpegai
