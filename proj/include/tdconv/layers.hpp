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

// Layer primitives of the engine: dilated 2-D convolution, max pooling,
// inference batch normalization, fully connected and ReLU.
//
// Every operation is pure and shape-checked. Convolutions never pad in time;
// frequency is zero-padded symmetrically by ConvSpec::pad_f.
//
// Summation order. With SummationOrder::fixed every convolution output is
//
//   acc = 0
//   for in_map m, for frequency tap kf, for time tap kt:  acc += w * x
//   out = acc + bias
//
// and every fully connected output is acc = 0; for i: acc += W[o][i] * x[i];
// out = acc + bias. Taps that fall into the frequency padding are skipped,
// which is bit-identical to adding w * 0 under round-to-nearest. Because the
// flatten order (map, freq, time) equals the (m, kf, kt) tap order, a fully
// connected layer and the convolution it is rewritten into produce
// bit-identical results.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdconv/errors.hpp"
#include "tdconv/tensor.hpp"

namespace tdconv {

enum class SummationOrder {
  fixed,      // in_map outer, frequency tap, time tap inner
  reordered,  // time tap outer, frequency tap, in_map inner
};

struct ConvSpec {
  std::size_t in_maps = 1;
  std::size_t out_maps = 1;
  std::size_t kernel_f = 1;
  std::size_t kernel_t = 1;
  std::size_t dilation_f = 1;
  std::size_t dilation_t = 1;
  std::size_t pad_f = 0;
  // out_maps x in_maps x kernel_f x kernel_t, kernel_t fastest. Tap 0 is the
  // kernel anchor: output t reads input t + kt * dilation_t.
  std::vector<float> weights;
  std::vector<float> bias;  // out_maps

  std::size_t extent_f() const { return (kernel_f - 1) * dilation_f + 1; }
  std::size_t extent_t() const { return (kernel_t - 1) * dilation_t + 1; }
  std::size_t taps() const { return in_maps * kernel_f * kernel_t; }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct PoolSpec {
  std::size_t window_f = 1;
  std::size_t window_t = 1;
  std::size_t stride_f = 1;
  std::size_t stride_t = 1;
  // Spacing between time taps of the window. Windowed networks use 1; the
  // densify rewrite raises it for pools that follow a strided time pool.
  std::size_t dilation_t = 1;

  std::size_t extent_t() const { return (window_t - 1) * dilation_t + 1; }

  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

// Frozen per-feature-map statistics, shared over frequency and time.
struct BatchNormSpec {
  std::vector<float> mean;
  std::vector<float> variance;
  std::vector<float> scale;
  std::vector<float> shift;
  float epsilon = 1e-5f;

  std::size_t channels() const { return mean.size(); }

  friend bool operator==(const BatchNormSpec&, const BatchNormSpec&) = default;
};

struct FullyConnectedSpec {
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
  std::vector<float> weights;  // out_dim x in_dim, row major
  std::vector<float> bias;     // out_dim

  friend bool operator==(const FullyConnectedSpec&,
                         const FullyConnectedSpec&) = default;
};

// ---------------------------------------------------------------------------
// Spec validation

inline void validate(const ConvSpec& s) {
  if (s.in_maps == 0 || s.out_maps == 0 || s.kernel_f == 0 || s.kernel_t == 0)
    throw ShapeError("conv: map counts and kernel sizes must be >= 1");
  if (s.dilation_f == 0 || s.dilation_t == 0)
    throw ShapeError("conv: dilations must be >= 1");
  if (s.weights.size() != s.out_maps * s.taps())
    throw ShapeError("conv: expected " + std::to_string(s.out_maps * s.taps()) +
                     " weights, got " + std::to_string(s.weights.size()));
  if (s.bias.size() != s.out_maps)
    throw ShapeError("conv: expected " + std::to_string(s.out_maps) +
                     " biases, got " + std::to_string(s.bias.size()));
}

inline void validate(const PoolSpec& s) {
  if (s.window_f == 0 || s.window_t == 0)
    throw ShapeError("pool: window sizes must be >= 1");
  if (s.stride_f == 0 || s.stride_t == 0 || s.dilation_t == 0)
    throw ShapeError("pool: strides and dilation must be >= 1");
  if (s.stride_t > s.window_t)
    throw ShapeError("pool: time stride " + std::to_string(s.stride_t) +
                     " exceeds window " + std::to_string(s.window_t));
}

inline void validate(const BatchNormSpec& s) {
  const std::size_t n = s.mean.size();
  if (n == 0 || s.variance.size() != n || s.scale.size() != n ||
      s.shift.size() != n)
    throw ShapeError("batchnorm: statistics vectors must share a length >= 1");
  if (!(s.epsilon > 0.0f)) throw ShapeError("batchnorm: epsilon must be > 0");
  for (float v : s.variance)
    if (!(v >= 0.0f)) throw ShapeError("batchnorm: negative variance");
}

inline void validate(const FullyConnectedSpec& s) {
  if (s.in_dim == 0 || s.out_dim == 0)
    throw ShapeError("fc: dimensions must be >= 1");
  if (s.weights.size() != s.in_dim * s.out_dim)
    throw ShapeError("fc: expected " + std::to_string(s.in_dim * s.out_dim) +
                     " weights, got " + std::to_string(s.weights.size()));
  if (s.bias.size() != s.out_dim)
    throw ShapeError("fc: expected " + std::to_string(s.out_dim) +
                     " biases, got " + std::to_string(s.bias.size()));
}

// ---------------------------------------------------------------------------
// Shape rules

inline Shape3 conv_output_shape(const Shape3& in, const ConvSpec& s) {
  if (in.fmaps != s.in_maps)
    throw ShapeError("conv expects " + std::to_string(s.in_maps) +
                     " input maps, got " + std::to_string(in.fmaps));
  const std::size_t padded_f = in.freq + 2 * s.pad_f;
  if (padded_f < s.extent_f())
    throw ShapeError("conv frequency extent " + std::to_string(s.extent_f()) +
                     " exceeds padded input " + std::to_string(padded_f));
  if (in.time < s.extent_t())
    throw ShapeError("conv time extent " + std::to_string(s.extent_t()) +
                     " exceeds input " + std::to_string(in.time));
  return Shape3{s.out_maps, padded_f - s.extent_f() + 1,
                in.time - s.extent_t() + 1};
}

inline Shape3 pool_output_shape(const Shape3& in, const PoolSpec& s) {
  if (in.freq < s.window_f)
    throw ShapeError("pool window " + std::to_string(s.window_f) +
                     " exceeds " + std::to_string(in.freq) + " frequency bins");
  if (in.time < s.extent_t())
    throw ShapeError("pool time extent " + std::to_string(s.extent_t()) +
                     " exceeds " + std::to_string(in.time) + " frames");
  return Shape3{in.fmaps, (in.freq - s.window_f) / s.stride_f + 1,
                (in.time - s.extent_t()) / s.stride_t + 1};
}

// ---------------------------------------------------------------------------
// Operations

inline Tensor3 conv2d_dilated(const Tensor3& input, const ConvSpec& spec,
                              SummationOrder order = SummationOrder::fixed) {
  validate(spec);
  const Shape3 out_shape = conv_output_shape(input.shape(), spec);
  Tensor3 out(out_shape);

  const std::size_t in_f = input.freq();
  const std::size_t out_t = out_shape.time;
  const std::size_t kf_n = spec.kernel_f;
  const std::size_t kt_n = spec.kernel_t;

  // Accumulates one tap into a whole output row; the row is the vector unit,
  // so each element still sees the taps one at a time in loop order.
  auto tap = [&](float* acc, std::size_t o, std::size_t fo, std::size_t m,
                 std::size_t kf, std::size_t kt) {
    const std::size_t fp = fo + kf * spec.dilation_f;  // padded coordinate
    if (fp < spec.pad_f || fp - spec.pad_f >= in_f) return;
    const float w = spec.weights[((o * spec.in_maps + m) * kf_n + kf) * kt_n + kt];
    const float* x = input.data().data() + input.offset(m, fp - spec.pad_f, kt * spec.dilation_t);
    for (std::size_t t = 0; t < out_t; ++t) acc[t] += w * x[t];
  };

  for (std::size_t o = 0; o < out_shape.fmaps; ++o) {
    for (std::size_t fo = 0; fo < out_shape.freq; ++fo) {
      float* acc = &out(o, fo, 0);
      if (order == SummationOrder::fixed) {
        for (std::size_t m = 0; m < spec.in_maps; ++m)
          for (std::size_t kf = 0; kf < kf_n; ++kf)
            for (std::size_t kt = 0; kt < kt_n; ++kt) tap(acc, o, fo, m, kf, kt);
      } else {
        for (std::size_t kt = 0; kt < kt_n; ++kt)
          for (std::size_t kf = 0; kf < kf_n; ++kf)
            for (std::size_t m = 0; m < spec.in_maps; ++m) tap(acc, o, fo, m, kf, kt);
      }
      const float b = spec.bias[o];
      for (std::size_t t = 0; t < out_t; ++t) acc[t] += b;
    }
  }
  return out;
}

inline Tensor3 maxpool(const Tensor3& input, const PoolSpec& spec) {
  validate(spec);
  const Shape3 out_shape = pool_output_shape(input.shape(), spec);
  Tensor3 out(out_shape);
  for (std::size_t m = 0; m < out_shape.fmaps; ++m) {
    for (std::size_t fo = 0; fo < out_shape.freq; ++fo) {
      for (std::size_t to = 0; to < out_shape.time; ++to) {
        const std::size_t f0 = fo * spec.stride_f;
        const std::size_t t0 = to * spec.stride_t;
        float best = input(m, f0, t0);
        for (std::size_t i = 0; i < spec.window_f; ++i) {
          for (std::size_t j = 0; j < spec.window_t; ++j) {
            const float v = input(m, f0 + i, t0 + j * spec.dilation_t);
            if (v > best) best = v;
          }
        }
        out(m, fo, to) = best;
      }
    }
  }
  return out;
}

// y = scale * (x - mean) / sqrt(variance + epsilon) + shift, per feature map.
inline Tensor3 batchnorm_inference(const Tensor3& input,
                                   const BatchNormSpec& spec) {
  validate(spec);
  if (input.fmaps() != spec.channels())
    throw ShapeError("batchnorm has " + std::to_string(spec.channels()) +
                     " channels, input has " + std::to_string(input.fmaps()) +
                     " maps");
  Tensor3 out(input.shape());
  const std::size_t plane = input.freq() * input.time();
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t m = 0; m < input.fmaps(); ++m) {
    const float mean = spec.mean[m];
    const float scale = spec.scale[m];
    const float shift = spec.shift[m];
    const float denom = std::sqrt(spec.variance[m] + spec.epsilon);
    for (std::size_t i = m * plane; i < (m + 1) * plane; ++i)
      dst[i] = scale * (src[i] - mean) / denom + shift;
  }
  return out;
}

inline Tensor3 relu(const Tensor3& input) {
  Tensor3 out(input.shape());
  std::transform(input.data().begin(), input.data().end(), out.data().begin(),
                 [](float x) { return x > 0.0f ? x : 0.0f; });
  return out;
}

inline std::vector<float> fully_connected(
    std::span<const float> input, const FullyConnectedSpec& spec,
    SummationOrder order = SummationOrder::fixed) {
  validate(spec);
  if (input.size() != spec.in_dim)
    throw ShapeError("fc expects " + std::to_string(spec.in_dim) +
                     " inputs, got " + std::to_string(input.size()));
  std::vector<float> out(spec.out_dim);
  for (std::size_t o = 0; o < spec.out_dim; ++o) {
    const float* w = &spec.weights[o * spec.in_dim];
    float acc = 0.0f;
    if (order == SummationOrder::fixed) {
      for (std::size_t i = 0; i < spec.in_dim; ++i) acc += w[i] * input[i];
    } else {
      for (std::size_t i = spec.in_dim; i-- > 0;) acc += w[i] * input[i];
    }
    out[o] = acc + spec.bias[o];
  }
  return out;
}

}  // namespace tdconv
