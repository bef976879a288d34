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

#include <iomanip>
#include <ostream>
#include <string>
#include <variant>

#include "tdconv/network.hpp"

namespace tdconv {

// Short layer label, sizes frequency x time: "conv 7 x 7", "pool 2 x 1",
// "FC". Dilations and strides that differ from the plain case are appended.
inline std::string layer_label(const LayerSpec& layer) {
  if (const auto* c = std::get_if<ConvSpec>(&layer)) {
    std::string s = "conv " + std::to_string(c->kernel_f) + " x " + std::to_string(c->kernel_t);
    if (c->dilation_f != 1 || c->dilation_t != 1)
      s += " dil " + std::to_string(c->dilation_f) + " x " + std::to_string(c->dilation_t);
    return s;
  }
  if (const auto* p = std::get_if<PoolSpec>(&layer)) {
    std::string s = "pool " + std::to_string(p->window_f) + " x " + std::to_string(p->window_t);
    if (p->stride_f != p->window_f || p->stride_t != p->window_t)
      s += " s " + std::to_string(p->stride_f) + " x " + std::to_string(p->stride_t);
    if (p->dilation_t != 1) s += " dil_t " + std::to_string(p->dilation_t);
    return s;
  }
  if (std::holds_alternative<FullyConnectedSpec>(layer)) return "FC";
  return std::string(layer_kind(layer));
}

inline std::string shape_cell(const LayerShape& s) {
  return s.flat ? std::to_string(s.shape.fmaps) : to_string(s.shape);
}

// Layer / output-shape table. By default only conv, pool and FC rows are
// listed, since batch norm, ReLU and flatten leave the shape unchanged or
// merely relabel it.
inline void write_shape_table(std::ostream& os, const NetworkSpec& net,
                              const ShapeTrace& trace, bool all_layers = false) {
  constexpr int kLabelWidth = 24;
  os << std::left << std::setw(kLabelWidth) << "Layer" << "Output: fmaps x f x T\n";
  os << std::setw(kLabelWidth)
     << (net.mode == NetworkMode::windowed ? "Input window" : "Input")
     << to_string(trace.input) << "\n";
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    const bool listed = std::holds_alternative<ConvSpec>(layer) ||
                        std::holds_alternative<PoolSpec>(layer) ||
                        std::holds_alternative<FullyConnectedSpec>(layer);
    if (!listed && !all_layers) continue;
    os << std::setw(kLabelWidth) << layer_label(layer) << shape_cell(trace.layers[i])
       << "\n";
  }
  os << std::right;
}

inline void write_shape_rows(std::ostream& os, const NetworkSpec& net,
                             const ShapeTrace& trace) {
  os << "mode\t" << to_string(net.mode) << "\n";
  os << "input\t" << trace.input.fmaps << "\t" << trace.input.freq << "\t"
     << trace.input.time << "\n";
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerShape& s = trace.layers[i];
    os << "layer\t" << i << "\t" << layer_kind(net.layers[i]) << "\t"
       << layer_label(net.layers[i]) << "\t" << s.shape.fmaps << "\t" << s.shape.freq
       << "\t" << s.shape.time << "\t" << (s.flat ? "flat" : "map") << "\n";
  }
}

}  // namespace tdconv
