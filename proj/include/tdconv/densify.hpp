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

// Windowed-classifier to dense-predictor rewrite.
//
// Walking the layers in order with a running time-dilation factor D (initially
// 1):
//
//   pool (time stride s):  stride_t -> 1, dilation_t *= D, then D *= s
//   conv:                  dilation_t *= D
//   flatten:               dropped; remembers the (maps, freq, time) it saw
//   first fc:              conv with kernel (freq x time) of that shape over
//                          its maps, dilation_t = D
//   later fc:              1 x 1 conv, dilation_t = D
//
// so a conv that follows p stride-s pools ends up dilated by s^p. Weights are
// moved, never changed: the flatten order (map, freq, time) is exactly the
// conv weight layout (in_map, kernel_f, kernel_t), so the fc matrix becomes
// the kernel tensor as is.

#pragma once

#include <cstddef>
#include <optional>
#include <iomanip>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "tdconv/errors.hpp"
#include "tdconv/network.hpp"

namespace tdconv {

struct LayerRewrite {
  std::size_t source_index = 0;
  std::optional<std::size_t> dense_index;  // empty when the layer is dropped
  std::string kind_before;
  std::string kind_after;
  std::size_t stride_t_before = 1;
  std::size_t stride_t_after = 1;
  std::size_t dilation_t_before = 1;
  std::size_t dilation_t_after = 1;
  // Time-dilation factor of the signal leaving this layer.
  std::size_t cumulative_dilation = 1;
};

struct FcConversion {
  std::size_t source_index = 0;
  std::size_t dense_index = 0;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t in_maps = 0;
  std::size_t kernel_f = 0;
  std::size_t kernel_t = 0;
  std::size_t dilation_t = 1;
};

struct DensifyReport {
  std::vector<LayerRewrite> layers;
  std::vector<FcConversion> fc_conversions;
  std::size_t receptive_field_before = 0;
  std::size_t receptive_field_after = 0;
};

struct DensifyResult {
  NetworkSpec net;
  DensifyReport report;
};

namespace detail {

inline std::size_t time_stride_of(const LayerSpec& layer) {
  if (const auto* p = std::get_if<PoolSpec>(&layer)) return p->stride_t;
  return 1;
}

inline std::size_t time_dilation_of(const LayerSpec& layer) {
  if (const auto* c = std::get_if<ConvSpec>(&layer)) return c->dilation_t;
  if (const auto* p = std::get_if<PoolSpec>(&layer)) return p->dilation_t;
  return 1;
}

// Conv without its weights and biases.
inline ConvSpec conv_structure(const ConvSpec& c) {
  ConvSpec s;
  s.in_maps = c.in_maps;
  s.out_maps = c.out_maps;
  s.kernel_f = c.kernel_f;
  s.kernel_t = c.kernel_t;
  s.dilation_f = c.dilation_f;
  s.dilation_t = c.dilation_t;
  s.pad_f = c.pad_f;
  return s;
}

// Shared rewrite. With `dilate` false the pools keep their strides and no
// dilation is introduced; only the fc head becomes convolutional. With
// `with_parameters` false conv weights and biases are left empty.
inline DensifyResult rewrite(const NetworkSpec& net, bool dilate,
                             bool with_parameters = true) {
  if (net.mode != NetworkMode::windowed)
    throw ModeError("densify expects a windowed network, got a " +
                    std::string(to_string(net.mode)) + " one");
  const ShapeTrace trace = infer_shapes(net);

  DensifyResult result;
  NetworkSpec& out = result.net;
  out.input_shape = net.input_shape;
  out.mode = dilate ? NetworkMode::dense : NetworkMode::strided;
  DensifyReport& report = result.report;
  report.receptive_field_before = receptive_field_time(net);

  std::size_t factor = 1;
  std::optional<Shape3> flattened;  // shape seen by Flatten
  bool first_fc = true;

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    LayerRewrite rec;
    rec.source_index = i;
    rec.kind_before = std::string(layer_kind(layer));
    rec.stride_t_before = time_stride_of(layer);
    rec.dilation_t_before = time_dilation_of(layer);

    if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      ConvSpec conv = with_parameters ? *c : conv_structure(*c);
      if (dilate) conv.dilation_t *= factor;
      out.layers.emplace_back(std::move(conv));
    } else if (const auto* p = std::get_if<PoolSpec>(&layer)) {
      PoolSpec pool = *p;
      if (dilate) {
        pool.dilation_t *= factor;
        pool.stride_t = 1;
        factor *= p->stride_t;
      }
      out.layers.emplace_back(pool);
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      flattened = trace.input_of(i);
    } else if (const auto* fc = std::get_if<FullyConnectedSpec>(&layer)) {
      ConvSpec conv;
      conv.out_maps = fc->out_dim;
      if (first_fc) {
        conv.in_maps = flattened->fmaps;
        conv.kernel_f = flattened->freq;
        conv.kernel_t = flattened->time;
        first_fc = false;
      } else {
        conv.in_maps = fc->in_dim;
      }
      conv.dilation_t = dilate ? factor : 1;
      if (with_parameters) {
        conv.weights = fc->weights;
        conv.bias = fc->bias;
      }
      report.fc_conversions.push_back(FcConversion{
          i, out.layers.size(), fc->in_dim, fc->out_dim, conv.in_maps,
          conv.kernel_f, conv.kernel_t, conv.dilation_t});
      out.layers.emplace_back(std::move(conv));
    } else {
      out.layers.push_back(layer);
    }

    if (!std::holds_alternative<FlattenSpec>(layer)) {
      const LayerSpec& written = out.layers.back();
      rec.dense_index = out.layers.size() - 1;
      rec.kind_after = std::string(layer_kind(written));
      rec.stride_t_after = time_stride_of(written);
      rec.dilation_t_after = time_dilation_of(written);
    }
    rec.cumulative_dilation = factor;
    report.layers.push_back(std::move(rec));
  }

  if (dilate) {
    if (with_parameters) infer_shapes(out);
    else trace_shapes(out, out.input_shape, /*check_parameters=*/false);
    report.receptive_field_after = receptive_field_time(out);
  } else {
    report.receptive_field_after = report.receptive_field_before;
  }
  return result;
}

}  // namespace detail

// Rewrites a windowed network into the equivalent dense network. Throws
// ModeError for a network that is not windowed, so a second application
// cannot silently square the dilations.
inline DensifyResult densify(const NetworkSpec& net) {
  return detail::rewrite(net, /*dilate=*/true);
}

// The windowed network applied convolutionally as is: the fc head becomes
// convolutional but pools keep their time strides. Its output on an
// utterance is the dense output subsampled by the product of the strides.
inline NetworkSpec convolutionalize(const NetworkSpec& net) {
  return detail::rewrite(net, /*dilate=*/false).net;
}

// Number of dense predictions for an utterance of `utterance_time` frames.
inline std::size_t dense_output_length(const NetworkSpec& net,
                                       std::size_t utterance_time) {
  const std::size_t rf = receptive_field_time(net);
  if (utterance_time < rf) throw InputTooShortError(utterance_time, rf);
  return utterance_time - rf + 1;
}

inline void write_report(std::ostream& os, const DensifyReport& report) {
  os << "receptive field: " << report.receptive_field_before << " -> "
     << report.receptive_field_after << "\n";
  os << std::left << std::setw(7) << "layer" << std::setw(12) << "kind"
     << std::setw(10) << "stride_t" << std::setw(12) << "dilation_t"
     << "cumulative\n";
  for (const LayerRewrite& r : report.layers) {
    std::string kind = r.kind_before;
    std::string stride = "-";
    std::string dilation = "(dropped)";
    if (r.dense_index) {
      if (r.kind_after != r.kind_before) kind += ">" + r.kind_after;
      stride = std::to_string(r.stride_t_before) + "->" +
               std::to_string(r.stride_t_after);
      dilation = std::to_string(r.dilation_t_before) + "->" +
                 std::to_string(r.dilation_t_after);
    }
    os << std::left << std::setw(7) << r.source_index << std::setw(12) << kind
       << std::setw(10) << stride << std::setw(12) << dilation
       << r.cumulative_dilation << "\n";
  }
  for (const FcConversion& c : report.fc_conversions) {
    os << "fc " << c.source_index << ": " << c.in_dim << " -> " << c.out_dim
       << " becomes conv " << c.in_maps << " -> " << c.out_dim << " kernel "
       << c.kernel_f << " x " << c.kernel_t << " dilation_t " << c.dilation_t
       << "\n";
  }
}

// One record per line, fields separated by tabs, fixed order.
inline void write_report_rows(std::ostream& os, const DensifyReport& report) {
  os << "rf\t" << report.receptive_field_before << "\t"
     << report.receptive_field_after << "\n";
  for (const LayerRewrite& r : report.layers) {
    os << "layer\t" << r.source_index << "\t"
       << (r.dense_index ? std::to_string(*r.dense_index) : "-") << "\t"
       << r.kind_before << "\t" << (r.dense_index ? r.kind_after : "-") << "\t"
       << r.stride_t_before << "\t" << r.stride_t_after << "\t"
       << r.dilation_t_before << "\t" << r.dilation_t_after << "\t"
       << r.cumulative_dilation << "\n";
  }
  for (const FcConversion& c : report.fc_conversions) {
    os << "fc\t" << c.source_index << "\t" << c.dense_index << "\t" << c.in_dim
       << "\t" << c.out_dim << "\t" << c.in_maps << "\t" << c.kernel_f << "\t"
       << c.kernel_t << "\t" << c.dilation_t << "\n";
  }
}

}  // namespace tdconv
