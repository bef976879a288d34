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

// Built-in networks with seeded random weights: the 13-conv VGG acoustic
// model on 3 x 64 x 48 windows, the three-layer toy classifier, and a random
// windowed-architecture generator for property tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tdconv/network.hpp"
#include "tdconv/random.hpp"

namespace tdconv {

// Seeded parameter factory. Weights are uniform with a ReLU-preserving scale
// sqrt(6 / fan_in); batch-norm statistics are drawn near the identity.
class WeightFactory {
 public:
  explicit WeightFactory(std::uint64_t seed) : rng_(seed) {}

  std::vector<float> uniform(std::size_t n, std::size_t fan_in) {
    const float scale = static_cast<float>(std::sqrt(6.0 / static_cast<double>(fan_in)));
    std::vector<float> v(n);
    for (float& x : v) x = rng_.uniform_pm1() * scale;
    return v;
  }

  std::vector<float> small(std::size_t n, float amplitude) {
    std::vector<float> v(n);
    for (float& x : v) x = rng_.uniform_pm1() * amplitude;
    return v;
  }

  ConvSpec conv(std::size_t in_maps, std::size_t out_maps, std::size_t kernel_f,
                std::size_t kernel_t, std::size_t pad_f,
                std::size_t dilation_t = 1) {
    ConvSpec c;
    c.in_maps = in_maps;
    c.out_maps = out_maps;
    c.kernel_f = kernel_f;
    c.kernel_t = kernel_t;
    c.dilation_t = dilation_t;
    c.pad_f = pad_f;
    c.weights = uniform(out_maps * c.taps(), c.taps());
    c.bias = small(out_maps, 0.1f);
    return c;
  }

  FullyConnectedSpec fc(std::size_t in_dim, std::size_t out_dim) {
    FullyConnectedSpec f;
    f.in_dim = in_dim;
    f.out_dim = out_dim;
    f.weights = uniform(in_dim * out_dim, in_dim);
    f.bias = small(out_dim, 0.1f);
    return f;
  }

  BatchNormSpec batchnorm(std::size_t channels) {
    BatchNormSpec b;
    b.mean = small(channels, 0.1f);
    b.variance = small(channels, 0.5f);
    for (float& v : b.variance) v += 1.0f;
    b.scale = small(channels, 0.1f);
    for (float& s : b.scale) s += 1.0f;
    b.shift = small(channels, 0.1f);
    b.epsilon = 1e-5f;
    return b;
  }

  Xorshift64& rng() { return rng_; }

 private:
  Xorshift64 rng_;
};

// The VGG classifier: five conv blocks, frequency-padded, unpadded in time,
// followed by 3 x FC 2048, FC 1024 and the output layer. Every conv and every
// FC except the last is followed by BatchNorm then ReLU.
inline NetworkSpec build_table1(std::size_t num_outputs = 32000,
                                std::uint64_t seed = 1) {
  WeightFactory wf(seed);
  NetworkSpec net;
  net.input_shape = Shape3{3, 64, 48};
  net.mode = NetworkMode::windowed;
  auto& L = net.layers;

  auto conv_bn_relu = [&](std::size_t in, std::size_t out, std::size_t k,
                          std::size_t pad) {
    L.emplace_back(wf.conv(in, out, k, k, pad));
    L.emplace_back(wf.batchnorm(out));
    L.emplace_back(ReluSpec{});
  };
  auto pool = [&](std::size_t window_f, std::size_t window_t) {
    L.emplace_back(PoolSpec{window_f, window_t, window_f, window_t, 1});
  };

  conv_bn_relu(3, 64, 7, 3);
  pool(2, 1);
  for (int i = 0; i < 3; ++i) conv_bn_relu(64, 64, 3, 1);
  pool(2, 1);
  conv_bn_relu(64, 128, 3, 1);
  conv_bn_relu(128, 128, 3, 1);
  conv_bn_relu(128, 128, 3, 1);
  pool(2, 1);
  conv_bn_relu(128, 256, 3, 1);
  conv_bn_relu(256, 256, 3, 1);
  conv_bn_relu(256, 256, 3, 1);
  pool(2, 2);
  conv_bn_relu(256, 512, 3, 1);
  conv_bn_relu(512, 512, 3, 1);
  conv_bn_relu(512, 512, 3, 1);
  pool(2, 2);

  L.emplace_back(FlattenSpec{});
  std::size_t in_dim = 512 * 2 * 3;
  for (std::size_t width : {2048, 2048, 2048, 1024}) {
    L.emplace_back(wf.fc(in_dim, width));
    L.emplace_back(wf.batchnorm(width));
    L.emplace_back(ReluSpec{});
    in_dim = width;
  }
  L.emplace_back(wf.fc(in_dim, num_outputs));
  return net;
}

// (conv3, pool2-s2, conv3) on 8-frame windows: one prediction per window.
inline NetworkSpec build_fig1_toy(std::uint64_t seed = 1, std::size_t maps = 1) {
  WeightFactory wf(seed);
  NetworkSpec net;
  net.input_shape = Shape3{1, 1, 8};
  net.mode = NetworkMode::windowed;
  net.layers.emplace_back(wf.conv(1, maps, 1, 3, 0));
  net.layers.emplace_back(PoolSpec{1, 2, 1, 2, 1});
  net.layers.emplace_back(wf.conv(maps, 1, 1, 3, 0));
  return net;
}

struct RandomNetOptions {
  std::size_t min_time_pools = 1;
  std::size_t max_time_pools = 3;
  std::size_t time_stride = 2;
  std::size_t max_kernel_t = 5;
  std::size_t max_maps = 3;
  std::size_t max_freq = 6;
};

// Random windowed classifier: conv groups separated by time pools of stride
// `time_stride`, then either a Flatten + FC head or a conv that consumes the
// remaining frames. The input window is sized so that it is consumed exactly.
inline NetworkSpec random_windowed_network(Xorshift64& rng,
                                           const RandomNetOptions& opt = {}) {
  for (;;) {
    WeightFactory wf(rng.next_u64());
    auto pick = [&](std::size_t lo, std::size_t hi) {
      return static_cast<std::size_t>(rng.uniform_int(lo, hi));
    };
    NetworkSpec net;
    net.mode = NetworkMode::windowed;
    const std::size_t in_maps = pick(1, opt.max_maps);
    const std::size_t in_freq = pick(1, opt.max_freq);
    std::size_t maps = in_maps;
    std::size_t freq = in_freq;
    bool ok = true;

    auto add_conv = [&](std::size_t kernel_t) {
      const std::size_t kernel_f = pick(1, std::min<std::size_t>(3, freq + 2));
      const std::size_t pad_f = pick(0, kernel_f / 2 + (freq < kernel_f ? 1 : 0));
      if (freq + 2 * pad_f < kernel_f) {
        ok = false;
        return;
      }
      const std::size_t out = pick(1, opt.max_maps);
      net.layers.emplace_back(wf.conv(maps, out, kernel_f, kernel_t, pad_f));
      maps = out;
      freq = freq + 2 * pad_f - kernel_f + 1;
      if (rng.uniform_int(0, 1)) net.layers.emplace_back(wf.batchnorm(maps));
      if (rng.uniform_int(0, 2)) net.layers.emplace_back(ReluSpec{});
    };

    const std::size_t pools = pick(opt.min_time_pools, opt.max_time_pools);
    for (std::size_t p = 0; p < pools && ok; ++p) {
      const std::size_t convs = pick(1, 2);
      for (std::size_t c = 0; c < convs && ok; ++c) add_conv(pick(1, opt.max_kernel_t));
      if (!ok) break;
      PoolSpec pool;
      pool.window_t = pick(opt.time_stride, opt.time_stride + 1);
      pool.stride_t = opt.time_stride;
      pool.window_f = pick(1, std::min<std::size_t>(2, freq));
      pool.stride_f = pick(1, pool.window_f);
      net.layers.emplace_back(pool);
      freq = (freq - pool.window_f) / pool.stride_f + 1;
    }
    for (std::size_t c = pick(0, 1); c > 0 && ok; --c) add_conv(pick(1, opt.max_kernel_t));
    if (!ok) continue;

    const std::size_t head_extent = pick(1, 3);
    if (rng.uniform_int(0, 1)) {
      net.layers.emplace_back(FlattenSpec{});
      std::size_t dim = maps * freq * head_extent;
      const std::size_t fcs = pick(1, 2);
      for (std::size_t i = 0; i < fcs; ++i) {
        const std::size_t out = pick(1, 6);
        net.layers.emplace_back(wf.fc(dim, out));
        if (i + 1 < fcs) {
          if (rng.uniform_int(0, 1)) net.layers.emplace_back(wf.batchnorm(out));
          net.layers.emplace_back(ReluSpec{});
        }
        dim = out;
      }
    } else {
      add_conv(head_extent);
      if (!ok) continue;
    }

    // Size the window from the head backwards so every frame is used.
    net.input_shape = Shape3{in_maps, in_freq, 1};
    std::size_t extent = 1;
    for (std::size_t i = net.layers.size(); i-- > 0;) {
      const LayerSpec& layer = net.layers[i];
      if (std::holds_alternative<FlattenSpec>(layer)) {
        extent = head_extent;
      } else if (const auto* c = std::get_if<ConvSpec>(&layer)) {
        extent += (c->kernel_t - 1) * c->dilation_t;
      } else if (const auto* p = std::get_if<PoolSpec>(&layer)) {
        extent = (extent - 1) * p->stride_t + p->extent_t();
      }
    }
    net.input_shape.time = extent;
    try {
      infer_shapes(net);
    } catch (const ShapeError&) {
      continue;
    }
    return net;
  }
}

}  // namespace tdconv
