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

// Sequential network description, shape inference, receptive-field
// arithmetic and forward evaluation.
//
// A network runs in one of three modes:
//
//  * windowed: the classifier form. The declared input window is consumed
//    exactly and one prediction comes out (time extent 1). Pools may stride
//    in time; a Flatten marker may hand the conv stack to fully connected
//    layers.
//  * dense: the rewritten form. No Flatten or FullyConnected layers and every
//    pool has time stride 1, so an utterance of T >= RF frames yields
//    T - RF + 1 predictions.
//  * strided: a windowed conv stack applied convolutionally without the
//    rewrite. Used to show the downsampling that strided time pooling causes.
//
// Fully connected activations are carried as (dim x 1 x 1) tensors so batch
// normalization treats each unit as a feature map in both forms.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "tdconv/errors.hpp"
#include "tdconv/layers.hpp"
#include "tdconv/tensor.hpp"

namespace tdconv {

struct ReluSpec {
  friend bool operator==(const ReluSpec&, const ReluSpec&) = default;
};

// Reshapes (maps, freq, time) into a (maps * freq * time) vector in storage
// order.
struct FlattenSpec {
  friend bool operator==(const FlattenSpec&, const FlattenSpec&) = default;
};

using LayerSpec = std::variant<ConvSpec, PoolSpec, BatchNormSpec,
                               FullyConnectedSpec, ReluSpec, FlattenSpec>;

enum class NetworkMode { windowed, dense, strided };

inline std::string_view to_string(NetworkMode mode) {
  switch (mode) {
    case NetworkMode::windowed: return "windowed";
    case NetworkMode::dense: return "dense";
    case NetworkMode::strided: return "strided";
  }
  return "?";
}

struct NetworkSpec {
  Shape3 input_shape;
  std::vector<LayerSpec> layers;
  NetworkMode mode = NetworkMode::windowed;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

inline std::string_view layer_kind(const LayerSpec& layer) {
  return std::visit(
      [](const auto& l) -> std::string_view {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConvSpec>) return "conv";
        else if constexpr (std::is_same_v<T, PoolSpec>) return "pool";
        else if constexpr (std::is_same_v<T, BatchNormSpec>) return "batchnorm";
        else if constexpr (std::is_same_v<T, FullyConnectedSpec>) return "fc";
        else if constexpr (std::is_same_v<T, ReluSpec>) return "relu";
        else return "flatten";
      },
      layer);
}

struct LayerShape {
  Shape3 shape;
  bool flat = false;  // a (dim x 1 x 1) vector after Flatten

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// Output shape of every layer for one input shape.
struct ShapeTrace {
  Shape3 input;
  std::vector<LayerShape> layers;

  const Shape3& output() const {
    return layers.empty() ? input : layers.back().shape;
  }
  // Shape entering layer i.
  const Shape3& input_of(std::size_t i) const {
    return i == 0 ? input : layers[i - 1].shape;
  }
};

namespace detail {

inline void check_mode(const NetworkSpec& net, std::size_t i) {
  const LayerSpec& layer = net.layers[i];
  if (net.mode == NetworkMode::windowed) return;
  if (std::holds_alternative<FlattenSpec>(layer) ||
      std::holds_alternative<FullyConnectedSpec>(layer)) {
    throw ShapeError(i, std::string(layer_kind(layer)) + " is not allowed in " +
                            std::string(to_string(net.mode)) + " mode");
  }
  if (net.mode == NetworkMode::dense) {
    if (const auto* p = std::get_if<PoolSpec>(&layer); p && p->stride_t != 1)
      throw ShapeError(i, "dense mode requires time stride 1 in every pool");
  }
}

// Shape rules for every layer on `input`, without the windowed-consumption
// check. With `check_parameters` false, conv and fc parameter vectors may be
// empty; used for structure-only networks.
inline ShapeTrace trace_shapes(const NetworkSpec& net, const Shape3& input,
                               bool check_parameters = true) {
  checked_elements(input);
  ShapeTrace trace{input, {}};
  trace.layers.reserve(net.layers.size());
  LayerShape cur{input, false};
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    check_mode(net, i);
    const LayerSpec& layer = net.layers[i];
    try {
      std::visit(
          [&](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ConvSpec>) {
              if (cur.flat) throw ShapeError("conv after flatten");
              if (check_parameters) validate(l);
              cur.shape = conv_output_shape(cur.shape, l);
            } else if constexpr (std::is_same_v<T, PoolSpec>) {
              if (cur.flat) throw ShapeError("pool after flatten");
              validate(l);
              cur.shape = pool_output_shape(cur.shape, l);
            } else if constexpr (std::is_same_v<T, BatchNormSpec>) {
              validate(l);
              if (cur.shape.fmaps != l.channels())
                throw ShapeError("batchnorm has " + std::to_string(l.channels()) +
                                 " channels, input has " +
                                 std::to_string(cur.shape.fmaps) + " maps");
            } else if constexpr (std::is_same_v<T, FullyConnectedSpec>) {
              if (!cur.flat) throw ShapeError("fc requires a flattened input");
              if (check_parameters) validate(l);
              if (cur.shape.fmaps != l.in_dim)
                throw ShapeError("fc expects " + std::to_string(l.in_dim) +
                                 " inputs, conv stack provides " +
                                 std::to_string(cur.shape.fmaps));
              cur.shape = Shape3{l.out_dim, 1, 1};
            } else if constexpr (std::is_same_v<T, FlattenSpec>) {
              if (cur.flat) throw ShapeError("flatten applied twice");
              cur.shape = Shape3{checked_elements(cur.shape), 1, 1};
              cur.flat = true;
            }
          },
          layer);
    } catch (const ShapeError& e) {
      if (e.layer_index()) throw;
      throw ShapeError(i, e.what());
    }
    trace.layers.push_back(cur);
  }
  return trace;
}

// Backward extent propagation: frames of the input that one output position
// depends on. `trace` supplies the time extent a Flatten consumes.
inline std::size_t backward_extent(const NetworkSpec& net,
                                   const ShapeTrace* trace) {
  std::size_t extent = 1;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const LayerSpec& layer = net.layers[i];
    if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      extent += (c->kernel_t - 1) * c->dilation_t;
    } else if (const auto* p = std::get_if<PoolSpec>(&layer)) {
      extent = (extent - 1) * p->stride_t + p->extent_t();
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      extent = trace->input_of(i).time;
    }
  }
  return extent;
}

}  // namespace detail

// Frames of input that influence one output position.
inline std::size_t receptive_field_time(const NetworkSpec& net) {
  if (net.mode == NetworkMode::windowed) {
    const ShapeTrace trace = detail::trace_shapes(net, net.input_shape);
    return detail::backward_extent(net, &trace);
  }
  return detail::backward_extent(net, nullptr);
}

// Shape trace of `net` on its declared input. Also enforces the mode
// invariants: a windowed network must produce a single prediction and every
// frame of its window must reach it; a dense or strided network must accept
// its declared input.
inline ShapeTrace infer_shapes(const NetworkSpec& net) {
  ShapeTrace trace = detail::trace_shapes(net, net.input_shape);
  if (net.mode == NetworkMode::windowed) {
    if (trace.output().time != 1)
      throw ShapeError(net.layers.empty() ? 0 : net.layers.size() - 1,
                       "windowed network ends with " +
                           std::to_string(trace.output().time) +
                           " time steps, expected a single prediction");
    const std::size_t rf = detail::backward_extent(net, &trace);
    if (rf != net.input_shape.time)
      throw ShapeError("windowed network uses only " + std::to_string(rf) +
                       " of its " + std::to_string(net.input_shape.time) +
                       " input frames");
  }
  return trace;
}

// Shape trace for an arbitrary input; checks the forward preconditions.
inline ShapeTrace infer_shapes(const NetworkSpec& net, const Shape3& input) {
  if (input.fmaps != net.input_shape.fmaps || input.freq != net.input_shape.freq)
    throw ShapeError("input " + to_string(input) + " does not match network input " +
                     to_string(net.input_shape) + " in maps or frequency");
  if (net.mode == NetworkMode::windowed) {
    if (input.time != net.input_shape.time) {
      // A layer that breaks on this length is reported by index.
      detail::trace_shapes(net, input);
      throw ShapeError("windowed network takes exactly " +
                       std::to_string(net.input_shape.time) + " frames, got " +
                       std::to_string(input.time));
    }
    return infer_shapes(net);
  }
  const std::size_t rf = receptive_field_time(net);
  if (input.time < rf) throw InputTooShortError(input.time, rf);
  return detail::trace_shapes(net, input);
}

// Applies one layer with the engine kernels.
inline Tensor3 apply_layer(const LayerSpec& layer, const Tensor3& x,
                           SummationOrder order = SummationOrder::fixed) {
  return std::visit(
      [&](const auto& l) -> Tensor3 {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConvSpec>) {
          return conv2d_dilated(x, l, order);
        } else if constexpr (std::is_same_v<T, PoolSpec>) {
          return maxpool(x, l);
        } else if constexpr (std::is_same_v<T, BatchNormSpec>) {
          return batchnorm_inference(x, l);
        } else if constexpr (std::is_same_v<T, FullyConnectedSpec>) {
          auto y = fully_connected(x.data(), l, order);
          return Tensor3(Shape3{l.out_dim, 1, 1}, std::move(y));
        } else if constexpr (std::is_same_v<T, ReluSpec>) {
          return relu(x);
        } else {
          const std::vector<float> flat(x.data().begin(), x.data().end());
          return Tensor3(Shape3{x.size(), 1, 1}, flat);
        }
      },
      layer);
}

// Evaluates `net` on `input`. Windowed networks take exactly their declared
// window and return the single prediction; dense and strided networks take
// any length >= their receptive field.
inline Tensor3 forward(const NetworkSpec& net, const Tensor3& input,
                       SummationOrder order = SummationOrder::fixed) {
  infer_shapes(net, input.shape());
  Tensor3 x = input;
  for (const LayerSpec& layer : net.layers) x = apply_layer(layer, x, order);
  return x;
}

// Number of multiply-accumulate weights in the network.
inline std::size_t parameter_count(const NetworkSpec& net) {
  std::size_t n = 0;
  for (const LayerSpec& layer : net.layers) {
    if (const auto* c = std::get_if<ConvSpec>(&layer))
      n += c->weights.size() + c->bias.size();
    else if (const auto* f = std::get_if<FullyConnectedSpec>(&layer))
      n += f->weights.size() + f->bias.size();
  }
  return n;
}

}  // namespace tdconv
