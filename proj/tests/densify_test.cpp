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

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <variant>
#include <vector>

#include "tdconv/architectures.hpp"
#include "tdconv/densify.hpp"
#include "tdconv/oracle.hpp"
#include "test_util.hpp"

namespace tdconv {
namespace {

std::vector<std::size_t> conv_dilations(const NetworkSpec& net) {
  std::vector<std::size_t> d;
  for (const LayerSpec& l : net.layers)
    if (const auto* c = std::get_if<ConvSpec>(&l)) d.push_back(c->dilation_t);
  return d;
}

TEST(DensifyTest, Fig1Toy) {
  const NetworkSpec net = build_fig1_toy(2);
  const DensifyResult r = densify(net);
  EXPECT_EQ(r.net.mode, NetworkMode::dense);
  ASSERT_EQ(r.net.layers.size(), 3u);
  EXPECT_EQ(std::get<PoolSpec>(r.net.layers[1]), (PoolSpec{1, 2, 1, 1, 1}));
  ConvSpec expected = std::get<ConvSpec>(net.layers[2]);
  expected.dilation_t = 2;
  EXPECT_EQ(std::get<ConvSpec>(r.net.layers[2]), expected);
  EXPECT_EQ(std::get<ConvSpec>(r.net.layers[0]), std::get<ConvSpec>(net.layers[0]));

  std::size_t dilated = 0;
  for (const LayerRewrite& l : r.report.layers)
    if (l.dilation_t_after != 1) {
      ++dilated;
      EXPECT_EQ(l.dilation_t_after, 2u);
    }
  EXPECT_EQ(dilated, 1u);
  EXPECT_EQ(r.report.receptive_field_before, 8u);
  EXPECT_EQ(r.report.receptive_field_after, 8u);
}

TEST(DensifyTest, Table1Dilations) {
  const NetworkSpec net = build_table1(16);
  const DensifyResult r = densify(net);
  // 13 convs: blocks 1-4 keep 1, block 5 gets 2, the five fc-derived get 4.
  std::vector<std::size_t> expected(10, 1);
  expected.insert(expected.end(), 3, 2);
  expected.insert(expected.end(), 5, 4);
  EXPECT_EQ(conv_dilations(r.net), expected);

  std::vector<std::size_t> pool_dilation, pool_stride;
  for (const LayerSpec& l : r.net.layers)
    if (const auto* p = std::get_if<PoolSpec>(&l)) {
      pool_dilation.push_back(p->dilation_t);
      pool_stride.push_back(p->stride_t);
    }
  EXPECT_EQ(pool_dilation, (std::vector<std::size_t>{1, 1, 1, 1, 2}));
  EXPECT_EQ(pool_stride, (std::vector<std::size_t>{1, 1, 1, 1, 1}));

  EXPECT_EQ(r.report.receptive_field_before, 48u);
  EXPECT_EQ(r.report.receptive_field_after, 48u);
  EXPECT_EQ(receptive_field_time(r.net), 48u);

  ASSERT_EQ(r.report.fc_conversions.size(), 5u);
  const FcConversion& first = r.report.fc_conversions[0];
  EXPECT_EQ(first.in_maps, 512u);
  EXPECT_EQ(first.kernel_f, 2u);
  EXPECT_EQ(first.kernel_t, 3u);
  EXPECT_EQ(first.dilation_t, 4u);
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_EQ(r.report.fc_conversions[i].kernel_f, 1u);
    EXPECT_EQ(r.report.fc_conversions[i].kernel_t, 1u);
    EXPECT_EQ(r.report.fc_conversions[i].dilation_t, 4u);
  }
  // Flatten is the only layer dropped.
  EXPECT_EQ(r.net.layers.size() + 1, net.layers.size());
}

TEST(DensifyTest, NoTimePoolingOnlyConvertsFc) {
  NetworkSpec net;
  net.input_shape = Shape3{2, 3, 5};
  WeightFactory wf(7);
  net.layers.emplace_back(wf.conv(2, 3, 3, 3, 1));
  net.layers.emplace_back(ReluSpec{});
  net.layers.emplace_back(PoolSpec{2, 1, 2, 1, 1});
  net.layers.emplace_back(FlattenSpec{});
  net.layers.emplace_back(wf.fc(3 * 1 * 3, 4));
  const DensifyResult r = densify(net);
  EXPECT_EQ(conv_dilations(r.net), (std::vector<std::size_t>{1, 1}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.net.layers[i], net.layers[i]);
  const auto& head = std::get<ConvSpec>(r.net.layers[3]);
  EXPECT_EQ(head.kernel_f, 1u);
  EXPECT_EQ(head.kernel_t, 3u);
  EXPECT_EQ(head.weights, std::get<FullyConnectedSpec>(net.layers[4]).weights);
}

TEST(DensifyTest, RejectsNonWindowedInput) {
  const NetworkSpec dense = densify(build_fig1_toy()).net;
  EXPECT_THROW(densify(dense), ModeError);
  EXPECT_THROW(densify(convolutionalize(build_fig1_toy())), ModeError);
}

TEST(DensifyTest, OutputLength) {
  const NetworkSpec net = build_table1(16);
  EXPECT_EQ(dense_output_length(net, 148), 101u);
  EXPECT_EQ(dense_output_length(net, 48), 1u);
  EXPECT_THROW(dense_output_length(net, 47), InputTooShortError);
}

std::vector<float> all_weights(const NetworkSpec& net) {
  std::vector<float> w;
  for (const LayerSpec& l : net.layers) {
    if (const auto* c = std::get_if<ConvSpec>(&l)) {
      w.insert(w.end(), c->weights.begin(), c->weights.end());
      w.insert(w.end(), c->bias.begin(), c->bias.end());
    } else if (const auto* f = std::get_if<FullyConnectedSpec>(&l)) {
      w.insert(w.end(), f->weights.begin(), f->weights.end());
      w.insert(w.end(), f->bias.begin(), f->bias.end());
    } else if (const auto* b = std::get_if<BatchNormSpec>(&l)) {
      for (const auto* v : {&b->mean, &b->variance, &b->scale, &b->shift})
        w.insert(w.end(), v->begin(), v->end());
    }
  }
  return w;
}

// Property: densify moves parameters without changing any of them, and
// keeps the receptive field; the dense net then yields T - RF + 1 outputs.
TEST(DensifyTest, RandomNetworks) {
  Xorshift64 rng(401);
  for (int i = 0; i < 200; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    const DensifyResult r = densify(net);
    ASSERT_EQ(all_weights(r.net), all_weights(net));
    ASSERT_EQ(parameter_count(r.net), parameter_count(net));
    const std::size_t rf = receptive_field_time(net);
    ASSERT_EQ(receptive_field_time(r.net), rf);
    ASSERT_EQ(r.report.receptive_field_after, rf);
    const std::size_t T = rf + testing::pick(rng, 0, 20);
    const Shape3 in{net.input_shape.fmaps, net.input_shape.freq, T};
    const ShapeTrace trace = infer_shapes(r.net, in);
    ASSERT_EQ(trace.output().time, T - rf + 1);
    ASSERT_EQ(trace.output().freq, infer_shapes(net).output().freq);
    ASSERT_EQ(trace.output().fmaps, infer_shapes(net).output().fmaps);
    ASSERT_EQ(dense_output_length(net, T), T - rf + 1);
  }
}

// Property: the strided net's outputs are the dense outputs at multiples of
// the total time stride.
TEST(DensifyTest, ConvolutionalizedIsSubsampledDense) {
  Xorshift64 rng(402);
  for (int i = 0; i < 40; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    std::size_t stride = 1;
    for (const LayerSpec& l : net.layers)
      if (const auto* p = std::get_if<PoolSpec>(&l)) stride *= p->stride_t;
    const std::size_t rf = receptive_field_time(net);
    const std::size_t T = rf + testing::pick(rng, 0, 24);
    const Tensor3 utt = seeded_random(net.input_shape.fmaps, net.input_shape.freq, T, i);
    const Tensor3 dense = forward(densify(net).net, utt);
    const Tensor3 strided = forward(convolutionalize(net), utt);
    ASSERT_EQ(strided.time(), (T - rf) / stride + 1);
    for (std::size_t j = 0; j < strided.time(); ++j)
      ASSERT_EQ(strided.column(j), dense.column(j * stride));
  }
}

// A dense net with one dilation off by one is caught by verification.
TEST(DensifyTest, CorruptedDilationFailsVerification) {
  const NetworkSpec net = build_fig1_toy(42, 2);
  NetworkSpec broken = densify(net).net;
  std::get<ConvSpec>(broken.layers[2]).dilation_t = 1;
  const Tensor3 utt = seeded_random(1, 1, 20, 42);
  // The corrupted net has a smaller receptive field, so it emits more
  // positions than the spliced path.
  const EquivalenceReport r = compare_paths(net, broken, utt, 0.0);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_abs_diff, 0.0);
}

TEST(DensifyTest, ReportFormats) {
  const DensifyResult r = densify(build_fig1_toy());
  std::ostringstream text, rows;
  write_report(text, r.report);
  write_report_rows(rows, r.report);
  EXPECT_NE(text.str().find("receptive field: 8 -> 8"), std::string::npos);
  EXPECT_EQ(rows.str(),
            "rf\t8\t8\n"
            "layer\t0\t0\tconv\tconv\t1\t1\t1\t1\t1\n"
            "layer\t1\t1\tpool\tpool\t2\t1\t1\t1\t2\n"
            "layer\t2\t2\tconv\tconv\t1\t1\t1\t2\t2\n");
}

}  // namespace
}  // namespace tdconv
