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

// Sliding-window reference evaluator and the dense-vs-spliced equivalence
// harness.
//
// eval_spliced cuts the utterance into one window per output position and
// classifies every window on its own with a separate set of naive layer loops
// that share no code with the engine kernels. Windows are packed as the lanes
// of a batch (lane index fastest) so the loops vectorize across windows;
// within a lane the arithmetic is the single-window arithmetic, in the engine's
// fixed summation order (in_map, frequency tap, time tap; bias last).

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "tdconv/densify.hpp"
#include "tdconv/errors.hpp"
#include "tdconv/network.hpp"
#include "tdconv/tensor.hpp"

namespace tdconv {
namespace oracle {

inline constexpr std::size_t kLanes = 16;

// Activations of kLanes windows, layout (map, freq, time, lane).
struct LaneBatch {
  Shape3 shape;
  std::vector<float> data;

  explicit LaneBatch(Shape3 s) : shape(s), data(checked_elements(s) * kLanes, 0.0f) {}

  float* at(std::size_t m, std::size_t f, std::size_t t) {
    return &data[((m * shape.freq + f) * shape.time + t) * kLanes];
  }
  const float* at(std::size_t m, std::size_t f, std::size_t t) const {
    return &data[((m * shape.freq + f) * shape.time + t) * kLanes];
  }
};

// Direct convolution. The tap loops run outside the output-plane loops, which
// leaves every output element receiving its taps in (m, kf, kt) order.
inline LaneBatch naive_conv(const LaneBatch& in, const ConvSpec& s) {
  const std::size_t out_f = in.shape.freq + 2 * s.pad_f - (s.kernel_f - 1) * s.dilation_f;
  const std::size_t out_t = in.shape.time - (s.kernel_t - 1) * s.dilation_t;
  LaneBatch out(Shape3{s.out_maps, out_f, out_t});
  for (std::size_t o = 0; o < s.out_maps; ++o) {
    for (std::size_t m = 0; m < s.in_maps; ++m) {
      for (std::size_t kf = 0; kf < s.kernel_f; ++kf) {
        for (std::size_t kt = 0; kt < s.kernel_t; ++kt) {
          const float w =
              s.weights[((o * s.in_maps + m) * s.kernel_f + kf) * s.kernel_t + kt];
          for (std::size_t fo = 0; fo < out_f; ++fo) {
            // Row index into the zero-padded input; padded rows add nothing.
            const std::ptrdiff_t fi = static_cast<std::ptrdiff_t>(fo + kf * s.dilation_f) -
                                      static_cast<std::ptrdiff_t>(s.pad_f);
            if (fi < 0 || fi >= static_cast<std::ptrdiff_t>(in.shape.freq)) continue;
            const float* x = in.at(m, static_cast<std::size_t>(fi), kt * s.dilation_t);
            float* y = out.at(o, fo, 0);
            for (std::size_t i = 0; i < out_t * kLanes; ++i) y[i] += w * x[i];
          }
        }
      }
    }
    float* y = out.at(o, 0, 0);
    for (std::size_t i = 0; i < out_f * out_t * kLanes; ++i) y[i] += s.bias[o];
  }
  return out;
}

inline LaneBatch naive_pool(const LaneBatch& in, const PoolSpec& s) {
  const std::size_t out_f = (in.shape.freq - s.window_f) / s.stride_f + 1;
  const std::size_t out_t = (in.shape.time - s.extent_t()) / s.stride_t + 1;
  LaneBatch out(Shape3{in.shape.fmaps, out_f, out_t});
  for (std::size_t m = 0; m < in.shape.fmaps; ++m) {
    for (std::size_t fo = 0; fo < out_f; ++fo) {
      for (std::size_t to = 0; to < out_t; ++to) {
        float* y = out.at(m, fo, to);
        const float* first = in.at(m, fo * s.stride_f, to * s.stride_t);
        std::copy(first, first + kLanes, y);
        for (std::size_t i = 0; i < s.window_f; ++i) {
          for (std::size_t j = 0; j < s.window_t; ++j) {
            const float* x = in.at(m, fo * s.stride_f + i, to * s.stride_t + j * s.dilation_t);
            for (std::size_t l = 0; l < kLanes; ++l) y[l] = x[l] > y[l] ? x[l] : y[l];
          }
        }
      }
    }
  }
  return out;
}

inline LaneBatch naive_batchnorm(const LaneBatch& in, const BatchNormSpec& s) {
  LaneBatch out(in.shape);
  const std::size_t per_map = in.shape.freq * in.shape.time * kLanes;
  for (std::size_t m = 0; m < in.shape.fmaps; ++m) {
    const float denom = std::sqrt(s.variance[m] + s.epsilon);
    for (std::size_t i = m * per_map; i < (m + 1) * per_map; ++i)
      out.data[i] = s.scale[m] * (in.data[i] - s.mean[m]) / denom + s.shift[m];
  }
  return out;
}

inline LaneBatch naive_relu(const LaneBatch& in) {
  LaneBatch out(in.shape);
  for (std::size_t i = 0; i < in.data.size(); ++i)
    out.data[i] = in.data[i] > 0.0f ? in.data[i] : 0.0f;
  return out;
}

inline LaneBatch naive_fc(const LaneBatch& in, const FullyConnectedSpec& s) {
  LaneBatch out(Shape3{s.out_dim, 1, 1});
  for (std::size_t o = 0; o < s.out_dim; ++o) {
    float acc[kLanes] = {};
    for (std::size_t i = 0; i < s.in_dim; ++i) {
      const float w = s.weights[o * s.in_dim + i];
      const float* x = &in.data[i * kLanes];
      for (std::size_t l = 0; l < kLanes; ++l) acc[l] += w * x[l];
    }
    float* y = out.at(o, 0, 0);
    for (std::size_t l = 0; l < kLanes; ++l) y[l] = acc[l] + s.bias[o];
  }
  return out;
}

inline LaneBatch naive_layer(const LayerSpec& layer, LaneBatch x) {
  return std::visit(
      [&](const auto& l) -> LaneBatch {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConvSpec>) return naive_conv(x, l);
        else if constexpr (std::is_same_v<T, PoolSpec>) return naive_pool(x, l);
        else if constexpr (std::is_same_v<T, BatchNormSpec>) return naive_batchnorm(x, l);
        else if constexpr (std::is_same_v<T, FullyConnectedSpec>) return naive_fc(x, l);
        else if constexpr (std::is_same_v<T, ReluSpec>) return naive_relu(x);
        else {
          // (map, freq, time) storage order is already the flat order.
          x.shape = Shape3{checked_elements(x.shape), 1, 1};
          return x;
        }
      },
      layer);
}

}  // namespace oracle

// One output vector per window start i in [0, T - RF], stored as column i of a
// (maps x freq x positions) tensor. Windows are split across `threads`
// workers; each worker writes its own columns, so the result does not depend
// on scheduling.
inline Tensor3 eval_spliced(const NetworkSpec& net, const Tensor3& utterance,
                            unsigned threads = 1) {
  if (net.mode != NetworkMode::windowed)
    throw ModeError("spliced evaluation needs a windowed network");
  const ShapeTrace trace = infer_shapes(net);
  const std::size_t rf = net.input_shape.time;
  if (utterance.fmaps() != net.input_shape.fmaps ||
      utterance.freq() != net.input_shape.freq)
    throw ShapeError("utterance " + to_string(utterance.shape()) +
                     " does not match network input " + to_string(net.input_shape));
  if (utterance.time() < rf) throw InputTooShortError(utterance.time(), rf);

  const std::size_t positions = utterance.time() - rf + 1;
  const Shape3 final_shape = trace.output();
  Tensor3 result(Shape3{final_shape.fmaps, final_shape.freq, positions});
  const std::size_t batches = (positions + oracle::kLanes - 1) / oracle::kLanes;

  auto run_batch = [&](std::size_t b) {
    const std::size_t first = b * oracle::kLanes;
    const std::size_t count = std::min(oracle::kLanes, positions - first);
    oracle::LaneBatch x(net.input_shape);
    for (std::size_t m = 0; m < utterance.fmaps(); ++m)
      for (std::size_t f = 0; f < utterance.freq(); ++f)
        for (std::size_t t = 0; t < rf; ++t)
          for (std::size_t l = 0; l < count; ++l)
            x.at(m, f, t)[l] = utterance(m, f, first + l + t);
    for (const LayerSpec& layer : net.layers) x = oracle::naive_layer(layer, std::move(x));
    for (std::size_t m = 0; m < final_shape.fmaps; ++m)
      for (std::size_t f = 0; f < final_shape.freq; ++f)
        for (std::size_t l = 0; l < count; ++l) result(m, f, first + l) = x.at(m, f, 0)[l];
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(batches)));
  if (threads == 1) {
    for (std::size_t b = 0; b < batches; ++b) run_batch(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < batches; b += threads) run_batch(b);
      });
    }
    for (auto& th : pool) th.join();
  }
  return result;
}

// Dense evaluation: one forward pass over the whole utterance.
inline Tensor3 eval_dense(const NetworkSpec& net, const Tensor3& utterance,
                          SummationOrder order = SummationOrder::fixed) {
  if (net.mode != NetworkMode::dense)
    throw ModeError("dense evaluation needs a dense network");
  return forward(net, utterance, order);
}

struct EquivalenceReport {
  std::size_t positions = 0;          // positions compared
  std::size_t spliced_positions = 0;
  std::size_t dense_positions = 0;
  bool shape_mismatch = false;
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  double argmax_agreement = 1.0;
  double tolerance = 0.0;
  bool passed = false;
  double spliced_seconds = 0.0;
  double dense_seconds = 0.0;
};

struct VerifyOptions {
  SummationOrder order = SummationOrder::fixed;
  unsigned threads = 1;
};

// Compares the two output sequences positionwise. Sequences of different
// length or vector size fail; the common prefix is still measured.
inline EquivalenceReport compare_sequences(const Tensor3& spliced,
                                           const Tensor3& dense,
                                           double tolerance) {
  EquivalenceReport r;
  r.tolerance = tolerance;
  r.spliced_positions = spliced.time();
  r.dense_positions = dense.time();
  r.shape_mismatch = spliced.fmaps() != dense.fmaps() ||
                     spliced.freq() != dense.freq() ||
                     spliced.time() != dense.time();
  if (spliced.fmaps() != dense.fmaps() || spliced.freq() != dense.freq()) {
    r.max_abs_diff = std::numeric_limits<double>::infinity();
    r.max_rel_diff = std::numeric_limits<double>::infinity();
    r.argmax_agreement = 0.0;
    return r;
  }
  r.positions = std::min(spliced.time(), dense.time());
  std::size_t agree = 0;
  for (std::size_t t = 0; t < r.positions; ++t) {
    const std::vector<float> a = spliced.column(t);
    const std::vector<float> b = dense.column(t);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = a[i], y = b[i];
      double diff = std::abs(x - y);
      if (std::isnan(diff)) diff = std::numeric_limits<double>::infinity();
      r.max_abs_diff = std::max(r.max_abs_diff, diff);
      const double scale = std::max(std::abs(x), std::abs(y));
      if (scale > 0.0) r.max_rel_diff = std::max(r.max_rel_diff, diff / scale);
    }
    if (std::max_element(a.begin(), a.end()) - a.begin() ==
        std::max_element(b.begin(), b.end()) - b.begin())
      ++agree;
  }
  r.argmax_agreement = r.positions == 0 ? 0.0
                                        : static_cast<double>(agree) /
                                              static_cast<double>(r.positions);
  r.passed = !r.shape_mismatch && r.max_abs_diff <= tolerance;
  return r;
}

// Spliced evaluation of `windowed` against dense evaluation of `dense` on the
// same utterance.
inline EquivalenceReport compare_paths(const NetworkSpec& windowed,
                                       const NetworkSpec& dense,
                                       const Tensor3& utterance, double tolerance,
                                       const VerifyOptions& options = {}) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const Tensor3 spliced = eval_spliced(windowed, utterance, options.threads);
  const auto t1 = clock::now();
  const Tensor3 dense_out = eval_dense(dense, utterance, options.order);
  const auto t2 = clock::now();
  EquivalenceReport r = compare_sequences(spliced, dense_out, tolerance);
  r.spliced_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.dense_seconds = std::chrono::duration<double>(t2 - t1).count();
  return r;
}

// Densifies `windowed` and certifies the result against spliced evaluation.
inline EquivalenceReport verify_equivalence(const NetworkSpec& windowed,
                                            const Tensor3& utterance,
                                            double tolerance,
                                            const VerifyOptions& options = {}) {
  return compare_paths(windowed, densify(windowed).net, utterance, tolerance,
                       options);
}

inline void write_report(std::ostream& os, const EquivalenceReport& r) {
  os << std::setprecision(9);
  os << "result: " << (r.passed ? "PASS" : "FAIL") << "\n"
     << "positions compared: " << r.positions << "\n"
     << "spliced positions: " << r.spliced_positions << "\n"
     << "dense positions: " << r.dense_positions << "\n"
     << "max abs diff: " << r.max_abs_diff << "\n"
     << "max rel diff: " << r.max_rel_diff << "\n"
     << "argmax agreement: " << r.argmax_agreement << "\n"
     << "tolerance: " << r.tolerance << "\n"
     << "spliced seconds: " << r.spliced_seconds << "\n"
     << "dense seconds: " << r.dense_seconds << "\n";
}

// Machine-readable record; wall times are left out so repeated runs print
// identical bytes.
inline void write_report_rows(std::ostream& os, const EquivalenceReport& r) {
  os << std::setprecision(9);
  os << "equivalence\t" << (r.passed ? "pass" : "fail") << "\t" << r.positions
     << "\t" << r.spliced_positions << "\t" << r.dense_positions << "\t"
     << r.max_abs_diff << "\t" << r.max_rel_diff << "\t" << r.argmax_agreement
     << "\t" << r.tolerance << "\n";
}

}  // namespace tdconv
