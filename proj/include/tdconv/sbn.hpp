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

// Stacked bottleneck networks in two forms over one set of weights.
//
// Two-stage form: a stage-1 DNN maps a window of `window` frames (feat_dim
// bins each, flattened bin-major) to a bottleneck vector. A stage-2 DNN reads
// the bottleneck vectors at the sampling offsets around each position,
// concatenated unit-major: input[m * taps + k] = bottleneck at offset k, unit
// m.
//
// CNN form: stage 1 is a conv with a feat_dim x window kernel followed by
// 1 x 1 convs; stage 2 starts with a 1 x taps conv dilated in time by the
// offset stride. Both layouts coincide with the conv weight layout, so the
// two forms share weight arrays verbatim.
//
// ReLU follows every layer except the bottleneck and the output layer.

#pragma once

#include <cstdint>
#include <vector>

#include "tdconv/architectures.hpp"
#include "tdconv/errors.hpp"
#include "tdconv/network.hpp"
#include "tdconv/tensor.hpp"

namespace tdconv {

struct SbnDims {
  std::size_t feat_dim = 16;
  std::size_t window = 11;
  std::vector<std::size_t> hidden1 = {32, 32};
  std::size_t bottleneck = 8;
  std::vector<std::size_t> hidden2 = {32};
  std::size_t outputs = 10;
  std::vector<int> offsets = {-10, -5, 0, 5, 10};
  // Stage-1 layers after the bottleneck. Not part of either evaluation path.
  std::vector<std::size_t> auxiliary = {32, 10};
};

struct SbnSpec {
  std::size_t feat_dim = 0;
  std::size_t window = 0;
  std::vector<int> offsets;
  std::vector<FullyConnectedSpec> stage1;     // feat_dim*window -> bottleneck
  std::vector<FullyConnectedSpec> stage2;     // bottleneck*taps -> outputs
  std::vector<FullyConnectedSpec> auxiliary;  // bottleneck -> aux targets

  std::size_t taps() const { return offsets.size(); }
  std::size_t offset_stride() const {
    return offsets.size() > 1 ? static_cast<std::size_t>(offsets[1] - offsets[0]) : 1;
  }
  std::size_t bottleneck() const { return stage1.back().out_dim; }
  std::size_t outputs() const { return stage2.back().out_dim; }
  std::size_t receptive_field() const {
    return window + (taps() - 1) * offset_stride();
  }

  friend bool operator==(const SbnSpec&, const SbnSpec&) = default;
};

inline void validate(const SbnSpec& s) {
  if (s.feat_dim == 0 || s.window == 0) throw ShapeError("sbn: empty input window");
  if (s.offsets.empty()) throw ShapeError("sbn: no bottleneck offsets");
  for (std::size_t i = 2; i < s.offsets.size(); ++i)
    if (s.offsets[i] - s.offsets[i - 1] != s.offsets[1] - s.offsets[0])
      throw ShapeError("sbn: offsets must form an arithmetic progression");
  if (s.offsets.size() > 1 && s.offsets[1] <= s.offsets[0])
    throw ShapeError("sbn: offsets must increase");
  if (s.stage1.empty() || s.stage2.empty()) throw ShapeError("sbn: empty stage");

  auto check_chain = [](const std::vector<FullyConnectedSpec>& layers,
                        std::size_t in_dim, const char* name) {
    for (const auto& l : layers) {
      validate(l);
      if (l.in_dim != in_dim)
        throw ShapeError(std::string("sbn: ") + name + " expects " +
                         std::to_string(in_dim) + " inputs, layer takes " +
                         std::to_string(l.in_dim));
      in_dim = l.out_dim;
    }
  };
  check_chain(s.stage1, s.feat_dim * s.window, "stage 1");
  check_chain(s.stage2, s.stage1.back().out_dim * s.taps(), "stage 2");
  if (!s.auxiliary.empty()) check_chain(s.auxiliary, s.stage1.back().out_dim, "auxiliary head");
}

inline SbnSpec make_sbn(const SbnDims& dims, std::uint64_t seed) {
  WeightFactory wf(seed);
  SbnSpec s;
  s.feat_dim = dims.feat_dim;
  s.window = dims.window;
  s.offsets = dims.offsets;
  std::size_t in = dims.feat_dim * dims.window;
  for (std::size_t h : dims.hidden1) {
    s.stage1.push_back(wf.fc(in, h));
    in = h;
  }
  s.stage1.push_back(wf.fc(in, dims.bottleneck));
  in = dims.bottleneck * dims.offsets.size();
  for (std::size_t h : dims.hidden2) {
    s.stage2.push_back(wf.fc(in, h));
    in = h;
  }
  s.stage2.push_back(wf.fc(in, dims.outputs));
  in = dims.bottleneck;
  for (std::size_t h : dims.auxiliary) {
    s.auxiliary.push_back(wf.fc(in, h));
    in = h;
  }
  validate(s);
  return s;
}

// Dense-mode CNN equivalent to the two-stage network.
inline NetworkSpec build_sbn_as_cnn(const SbnSpec& spec) {
  validate(spec);
  NetworkSpec net;
  net.mode = NetworkMode::dense;
  net.input_shape = Shape3{1, spec.feat_dim, spec.receptive_field()};

  auto append_stage = [&](const std::vector<FullyConnectedSpec>& stage,
                          ConvSpec first) {
    for (std::size_t i = 0; i < stage.size(); ++i) {
      ConvSpec c = i == 0 ? first : ConvSpec{};
      if (i > 0) c.in_maps = stage[i].in_dim;
      c.out_maps = stage[i].out_dim;
      c.weights = stage[i].weights;
      c.bias = stage[i].bias;
      net.layers.emplace_back(std::move(c));
      if (i + 1 < stage.size()) net.layers.emplace_back(ReluSpec{});
    }
  };

  ConvSpec first1;
  first1.in_maps = 1;
  first1.kernel_f = spec.feat_dim;
  first1.kernel_t = spec.window;
  append_stage(spec.stage1, first1);

  ConvSpec first2;
  first2.in_maps = spec.bottleneck();
  first2.kernel_t = spec.taps();
  first2.dilation_t = spec.offset_stride();
  append_stage(spec.stage2, first2);

  infer_shapes(net);
  return net;
}

namespace detail {

// Plain matrix-vector DNN: acc = 0, add w * x in input order, then bias.
inline std::vector<float> run_dnn(const std::vector<FullyConnectedSpec>& layers,
                                  std::vector<float> x) {
  for (std::size_t n = 0; n < layers.size(); ++n) {
    const FullyConnectedSpec& l = layers[n];
    std::vector<float> y(l.out_dim);
    for (std::size_t o = 0; o < l.out_dim; ++o) {
      float acc = 0.0f;
      for (std::size_t i = 0; i < l.in_dim; ++i) acc += l.weights[o * l.in_dim + i] * x[i];
      y[o] = acc + l.bias[o];
      if (n + 1 < layers.size() && !(y[o] > 0.0f)) y[o] = 0.0f;
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace detail

// Reference path: for every output position the stage-1 DNN is run afresh on
// each of the sampled windows, then stage 2 on their bottleneck vectors.
// Column i corresponds to stage-1 windows starting at i + k * stride.
inline Tensor3 eval_sbn_two_stage(const SbnSpec& spec, const Tensor3& utterance) {
  validate(spec);
  if (utterance.fmaps() != 1 || utterance.freq() != spec.feat_dim)
    throw ShapeError("sbn expects a 1 x " + std::to_string(spec.feat_dim) +
                     " x T utterance, got " + to_string(utterance.shape()));
  const std::size_t rf = spec.receptive_field();
  if (utterance.time() < rf) throw InputTooShortError(utterance.time(), rf);

  const std::size_t positions = utterance.time() - rf + 1;
  const std::size_t taps = spec.taps();
  const std::size_t bn = spec.bottleneck();
  Tensor3 out(Shape3{spec.outputs(), 1, positions});
  std::vector<float> window(spec.feat_dim * spec.window);
  for (std::size_t i = 0; i < positions; ++i) {
    std::vector<float> stacked(bn * taps);
    for (std::size_t k = 0; k < taps; ++k) {
      const std::size_t start = i + k * spec.offset_stride();
      for (std::size_t f = 0; f < spec.feat_dim; ++f)
        for (std::size_t t = 0; t < spec.window; ++t)
          window[f * spec.window + t] = utterance(0, f, start + t);
      const std::vector<float> b = detail::run_dnn(spec.stage1, window);
      for (std::size_t m = 0; m < bn; ++m) stacked[m * taps + k] = b[m];
    }
    const std::vector<float> y = detail::run_dnn(spec.stage2, std::move(stacked));
    for (std::size_t o = 0; o < y.size(); ++o) out(o, 0, i) = y[o];
  }
  return out;
}

// Auxiliary classifier on one stage-1 window (flattened bin-major).
inline std::vector<float> eval_sbn_auxiliary(const SbnSpec& spec,
                                             const std::vector<float>& window) {
  validate(spec);
  if (spec.auxiliary.empty()) throw ShapeError("sbn has no auxiliary head");
  if (window.size() != spec.feat_dim * spec.window)
    throw ShapeError("sbn auxiliary head expects a full stage-1 window");
  std::vector<float> b = detail::run_dnn(spec.stage1, window);
  // The bottleneck itself is linear; the head applies ReLU after its hidden layers.
  return detail::run_dnn(spec.auxiliary, std::move(b));
}

}  // namespace tdconv
