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

// Analytic multiply-accumulate counts for spliced and dense evaluation.
//
//   conv:  out_maps * out_freq * out_time * in_maps * kernel_f * kernel_t
//   fc:    in_dim * out_dim
//
// Pool comparisons and batch-norm / ReLU element ops are tallied separately
// and do not enter the headline ratio, as are activations: output elements
// written, a proxy for memory traffic. Counts come from shapes only, so they
// are exact and independent of dilation.

#pragma once

#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "tdconv/densify.hpp"
#include "tdconv/errors.hpp"
#include "tdconv/network.hpp"

namespace tdconv {

struct LayerCost {
  std::size_t index = 0;
  std::string kind;
  Shape3 output;
  std::uint64_t macs = 0;
  std::uint64_t other_ops = 0;  // pool comparisons, bn and relu element ops
  std::uint64_t activations = 0;
};

struct CostFragment {
  std::vector<LayerCost> layers;
  std::uint64_t total_macs = 0;
  std::uint64_t total_other_ops = 0;
  std::uint64_t total_activations = 0;
  std::size_t evaluations = 0;  // windows (spliced) or passes (dense, 1)
};

struct CostReport {
  std::size_t utterance_time = 0;
  std::size_t window_size = 0;
  CostFragment spliced;
  CostFragment dense;
  // spliced / dense in lowest terms; empty when the dense count is zero.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> ratio;

  double ratio_value() const {
    return ratio ? static_cast<double>(ratio->first) /
                       static_cast<double>(ratio->second)
                 : 0.0;
  }
};

namespace detail {

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    throw Error("operation count overflows 64 bits");
  return a * b;
}

inline std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a)
    throw Error("operation count overflows 64 bits");
  return a + b;
}

// Costs of one evaluation along `trace`, scaled by `times`.
inline CostFragment count(const NetworkSpec& net, const ShapeTrace& trace,
                          std::uint64_t times) {
  CostFragment frag;
  frag.evaluations = static_cast<std::size_t>(times);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    const Shape3& out = trace.layers[i].shape;
    const std::uint64_t elems = mul(mul(out.fmaps, out.freq), out.time);
    LayerCost c{i, std::string(layer_kind(layer)), out, 0, 0, mul(elems, times)};
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      c.macs = mul(elems, conv->taps());
    } else if (const auto* fc = std::get_if<FullyConnectedSpec>(&layer)) {
      c.macs = mul(fc->in_dim, fc->out_dim);
    } else if (const auto* pool = std::get_if<PoolSpec>(&layer)) {
      c.other_ops = mul(elems, pool->window_f * pool->window_t - 1);
    } else if (std::holds_alternative<BatchNormSpec>(layer) ||
               std::holds_alternative<ReluSpec>(layer)) {
      c.other_ops = elems;
    }
    c.macs = mul(c.macs, times);
    c.other_ops = mul(c.other_ops, times);
    frag.total_macs = add(frag.total_macs, c.macs);
    frag.total_other_ops = add(frag.total_other_ops, c.other_ops);
    frag.total_activations = add(frag.total_activations, c.activations);
    frag.layers.push_back(std::move(c));
  }
  return frag;
}

}  // namespace detail

// One window's cost times the number of windows, T - RF + 1.
inline CostFragment count_macs_windowed(const NetworkSpec& net,
                                        std::size_t utterance_time) {
  if (net.mode != NetworkMode::windowed)
    throw ModeError("windowed cost needs a windowed network");
  const ShapeTrace trace = infer_shapes(net);
  const std::size_t windows = dense_output_length(net, utterance_time);
  return detail::count(net, trace, windows);
}

// One pass over the whole utterance.
inline CostFragment count_macs_dense(const NetworkSpec& net,
                                     std::size_t utterance_time) {
  if (net.mode != NetworkMode::dense)
    throw ModeError("dense cost needs a dense network");
  const ShapeTrace trace = infer_shapes(
      net, Shape3{net.input_shape.fmaps, net.input_shape.freq, utterance_time});
  return detail::count(net, trace, 1);
}

inline CostReport cost_report(const NetworkSpec& windowed,
                              std::size_t utterance_time) {
  CostReport r;
  r.utterance_time = utterance_time;
  r.window_size = receptive_field_time(windowed);
  r.spliced = count_macs_windowed(windowed, utterance_time);
  // Counting needs only the structure, so the rewrite skips the weights.
  const NetworkSpec dense =
      detail::rewrite(windowed, /*dilate=*/true, /*with_parameters=*/false).net;
  if (utterance_time < r.window_size)
    throw InputTooShortError(utterance_time, r.window_size);
  const ShapeTrace trace = detail::trace_shapes(
      dense, Shape3{dense.input_shape.fmaps, dense.input_shape.freq, utterance_time},
      /*check_parameters=*/false);
  r.dense = detail::count(dense, trace, 1);
  if (r.dense.total_macs != 0) {
    const std::uint64_t g = std::gcd(r.spliced.total_macs, r.dense.total_macs);
    r.ratio = std::pair{r.spliced.total_macs / g, r.dense.total_macs / g};
  }
  return r;
}

inline void write_report(std::ostream& os, const CostReport& r) {
  os << "utterance frames: " << r.utterance_time << "\n"
     << "window size: " << r.window_size << "\n"
     << "windows: " << r.spliced.evaluations << "\n";
  os << std::left << std::setw(7) << "layer" << std::setw(11) << "kind"
     << std::setw(20) << "spliced MACs" << "dense MACs\n";
  // The dense net has no flatten, so layers are matched by kind in order.
  std::size_t d = 0;
  for (const LayerCost& s : r.spliced.layers) {
    if (s.kind == "flatten") continue;
    const std::uint64_t dense = d < r.dense.layers.size() ? r.dense.layers[d].macs : 0;
    os << std::left << std::setw(7) << s.index << std::setw(11) << s.kind
       << std::setw(20) << s.macs << dense << "\n";
    ++d;
  }
  os << "total spliced MACs: " << r.spliced.total_macs << "\n"
     << "total dense MACs: " << r.dense.total_macs << "\n"
     << "other ops spliced: " << r.spliced.total_other_ops << "\n"
     << "other ops dense: " << r.dense.total_other_ops << "\n"
     << "activations spliced: " << r.spliced.total_activations << "\n"
     << "activations dense: " << r.dense.total_activations << "\n";
  if (r.ratio) {
    os << "ratio spliced/dense: " << r.ratio->first << "/" << r.ratio->second
       << " = " << std::setprecision(6) << std::fixed << r.ratio_value()
       << std::defaultfloat << "\n";
  } else {
    os << "ratio spliced/dense: undefined (no dense MACs)\n";
  }
}

inline void write_report_rows(std::ostream& os, const CostReport& r) {
  for (const LayerCost& c : r.spliced.layers)
    os << "spliced\t" << c.index << "\t" << c.kind << "\t" << c.macs << "\t"
       << c.other_ops << "\t" << c.activations << "\n";
  for (const LayerCost& c : r.dense.layers)
    os << "dense\t" << c.index << "\t" << c.kind << "\t" << c.macs << "\t"
       << c.other_ops << "\t" << c.activations << "\n";
  os << "total\t" << r.utterance_time << "\t" << r.window_size << "\t"
     << r.spliced.total_macs << "\t" << r.dense.total_macs << "\t";
  if (r.ratio) os << r.ratio->first << "/" << r.ratio->second;
  else os << "-";
  os << "\n";
  os << "activations\t" << r.spliced.total_activations << "\t"
     << r.dense.total_activations << "\n";
}

}  // namespace tdconv
