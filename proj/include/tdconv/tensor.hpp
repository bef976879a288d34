/* Copyright 2026 The tdconv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdconv/errors.hpp"
#include "tdconv/random.hpp"

namespace tdconv {

// Extent of a feature-map stack: maps x frequency x time.
struct Shape3 {
  std::size_t fmaps = 1;
  std::size_t freq = 1;
  std::size_t time = 1;

  friend bool operator==(const Shape3&, const Shape3&) = default;
};

inline std::string to_string(const Shape3& s) {
  return std::to_string(s.fmaps) + " x " + std::to_string(s.freq) + " x " +
         std::to_string(s.time);
}

// Number of elements of `s`, or DimensionError if an axis is empty or the
// product does not fit in memory.
inline std::size_t checked_elements(const Shape3& s) {
  if (s.fmaps == 0 || s.freq == 0 || s.time == 0) {
    throw DimensionError("tensor dimensions must be >= 1, got " +
                         to_string(s));
  }
  constexpr std::size_t kMax =
      std::numeric_limits<std::ptrdiff_t>::max() / sizeof(float);
  std::size_t n = s.fmaps;
  for (std::size_t d : {s.freq, s.time}) {
    if (n > kMax / d) {
      throw DimensionError("tensor dimensions overflow: " + to_string(s));
    }
    n *= d;
  }
  return n;
}

// Dense (fmap, freq, time) array of floats, time fastest.
class Tensor3 {
 public:
  explicit Tensor3(Shape3 shape)
      : shape_(shape), data_(checked_elements(shape), 0.0f) {}

  Tensor3(Shape3 shape, std::vector<float> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != checked_elements(shape_)) {
      throw DimensionError("tensor of shape " + to_string(shape_) +
                           " needs " + std::to_string(checked_elements(shape_)) +
                           " elements, got " + std::to_string(data_.size()));
    }
  }

  const Shape3& shape() const { return shape_; }
  std::size_t fmaps() const { return shape_.fmaps; }
  std::size_t freq() const { return shape_.freq; }
  std::size_t time() const { return shape_.time; }
  std::size_t size() const { return data_.size(); }

  std::size_t offset(std::size_t m, std::size_t f, std::size_t t) const {
    return (m * shape_.freq + f) * shape_.time + t;
  }

  float operator()(std::size_t m, std::size_t f, std::size_t t) const {
    return data_[offset(m, f, t)];
  }
  float& operator()(std::size_t m, std::size_t f, std::size_t t) {
    return data_[offset(m, f, t)];
  }

  float at(std::size_t m, std::size_t f, std::size_t t) const {
    check_index(m, f, t);
    return data_[offset(m, f, t)];
  }
  void set(std::size_t m, std::size_t f, std::size_t t, float value) {
    check_index(m, f, t);
    data_[offset(m, f, t)] = value;
  }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  // Contiguous time row of map m, frequency bin f.
  std::span<const float> row(std::size_t m, std::size_t f) const {
    return std::span<const float>(data_).subspan(offset(m, f, 0),
                                                 shape_.time);
  }

  // All (fmap, freq) values at time step t, in storage order. This is the
  // output vector for position t of a dense prediction.
  std::vector<float> column(std::size_t t) const {
    if (t >= shape_.time) throw BoundsError("column index out of range");
    std::vector<float> out;
    out.reserve(shape_.fmaps * shape_.freq);
    for (std::size_t m = 0; m < shape_.fmaps; ++m) {
      for (std::size_t f = 0; f < shape_.freq; ++f) {
        out.push_back((*this)(m, f, t));
      }
    }
    return out;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  void check_index(std::size_t m, std::size_t f, std::size_t t) const {
    if (m >= shape_.fmaps || f >= shape_.freq || t >= shape_.time) {
      throw BoundsError("index (" + std::to_string(m) + ", " +
                        std::to_string(f) + ", " + std::to_string(t) +
                        ") outside tensor of shape " + to_string(shape_));
    }
  }

  Shape3 shape_;
  std::vector<float> data_;
};

inline Tensor3 zeros(std::size_t fmaps, std::size_t freq, std::size_t time) {
  return Tensor3(Shape3{fmaps, freq, time});
}

// Uniform [-1, 1) fixture tensor drawn from Xorshift64(seed) in storage
// order.
inline Tensor3 seeded_random(std::size_t fmaps, std::size_t freq,
                             std::size_t time, std::uint64_t seed) {
  Tensor3 out(Shape3{fmaps, freq, time});
  Xorshift64 rng(seed);
  for (float& v : out.data()) v = rng.uniform_pm1();
  return out;
}

// Frames [start, start + length) of every row.
inline Tensor3 slice_time(const Tensor3& input, std::size_t start,
                          std::size_t length) {
  if (length == 0 || start > input.time() || length > input.time() - start) {
    throw BoundsError("time window [" + std::to_string(start) + ", " +
                      std::to_string(start + length) +
                      ") outside tensor with " + std::to_string(input.time()) +
                      " frames");
  }
  Tensor3 out(Shape3{input.fmaps(), input.freq(), length});
  for (std::size_t m = 0; m < input.fmaps(); ++m) {
    for (std::size_t f = 0; f < input.freq(); ++f) {
      auto src = input.row(m, f).subspan(start, length);
      std::copy(src.begin(), src.end(), &out(m, f, 0));
    }
  }
  return out;
}

// Zero frames added before and after every row.
inline Tensor3 pad_time(const Tensor3& input, std::size_t before,
                        std::size_t after) {
  Tensor3 out(Shape3{input.fmaps(), input.freq(),
                     input.time() + before + after});
  for (std::size_t m = 0; m < input.fmaps(); ++m) {
    for (std::size_t f = 0; f < input.freq(); ++f) {
      auto src = input.row(m, f);
      std::copy(src.begin(), src.end(), &out(m, f, before));
    }
  }
  return out;
}

// Binary dump: three little-endian uint32 dims (fmaps, freq, time), then the
// elements as little-endian IEEE-754 binary32 in storage order.
namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) |
        (v >> 24);
  }
  return v;
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  v = to_little_endian(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw IoError("truncated tensor dump");
  }
  return to_little_endian(v);
}

}  // namespace detail

inline void write_dump(std::ostream& out, const Tensor3& t) {
  for (std::size_t d : {t.fmaps(), t.freq(), t.time()}) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      throw IoError("dimension does not fit the dump format");
    }
    detail::put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (float v : t.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw IoError("failed writing tensor dump");
}

inline Tensor3 read_dump(std::istream& in) {
  Shape3 shape;
  shape.fmaps = detail::get_u32(in);
  shape.freq = detail::get_u32(in);
  shape.time = detail::get_u32(in);
  std::vector<float> data(checked_elements(shape));
  for (float& v : data) v = std::bit_cast<float>(detail::get_u32(in));
  return Tensor3(shape, std::move(data));
}

}  // namespace tdconv
