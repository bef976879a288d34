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

#include <cstdint>
#include <sstream>

#include "tdconv/architectures.hpp"
#include "tdconv/flops.hpp"
#include "test_util.hpp"

namespace tdconv {
namespace {

NetworkSpec single_conv3() {
  NetworkSpec net;
  net.input_shape = Shape3{1, 1, 3};
  net.layers.emplace_back(WeightFactory(1).conv(1, 1, 1, 3, 0));
  return net;
}

TEST(FlopsTest, SingleConv) {
  const NetworkSpec net = single_conv3();
  EXPECT_EQ(count_macs_windowed(net, 10).total_macs, 24u);
  EXPECT_EQ(count_macs_windowed(net, 10).evaluations, 8u);
  const NetworkSpec dense = densify(net).net;
  EXPECT_EQ(count_macs_dense(dense, 10).total_macs, 24u);
  const CostReport r = cost_report(net, 10);
  ASSERT_TRUE(r.ratio);
  EXPECT_EQ(*r.ratio, (std::pair<std::uint64_t, std::uint64_t>{1, 1}));
}

TEST(FlopsTest, EmptyNetwork) {
  NetworkSpec net;
  net.input_shape = Shape3{1, 1, 1};
  EXPECT_EQ(count_macs_windowed(net, 5).total_macs, 0u);
  const CostReport r = cost_report(net, 5);
  EXPECT_EQ(r.dense.total_macs, 0u);
  EXPECT_FALSE(r.ratio);
}

TEST(FlopsTest, Preconditions) {
  const NetworkSpec net = single_conv3();
  EXPECT_THROW(count_macs_windowed(net, 2), InputTooShortError);
  EXPECT_THROW(count_macs_dense(net, 10), ModeError);
  EXPECT_THROW(count_macs_windowed(densify(net).net, 10), ModeError);
}

TEST(FlopsTest, Fig1ToyRatio) {
  const CostReport r = cost_report(build_fig1_toy(), 100);
  // Per window: 6 * 3 + 1 * 3 = 21 MACs, 93 windows. Dense: 98 * 3 + 93 * 3.
  EXPECT_EQ(r.spliced.total_macs, 21u * 93);
  EXPECT_EQ(r.dense.total_macs, 98u * 3 + 93u * 3);
  // Elements written. Per window 6 + 3 + 1; dense 98 + 97 + 93.
  EXPECT_EQ(r.spliced.total_activations, 10u * 93);
  EXPECT_EQ(r.dense.total_activations, 98u + 97 + 93);
  EXPECT_GT(r.ratio_value(), 2.0);
}

// Reference counts from a separate layer-table computation.
struct Table1Case {
  std::size_t outputs;
  std::size_t frames;
  std::uint64_t spliced;
  std::uint64_t dense;
};

TEST(FlopsTest, Table1Counts) {
  const Table1Case cases[] = {
      {32000, 148, 88576450560ull, 10530103296ull},
      {32000, 500, 397278535680ull, 43960934400ull},
      {64, 148, 85273501696ull, 7227154432ull},
      {64, 500, 382464319488ull, 29146718208ull},
  };
  for (const auto& c : cases) {
    const CostReport r = cost_report(build_table1(c.outputs), c.frames);
    EXPECT_EQ(r.spliced.total_macs, c.spliced) << c.outputs << " " << c.frames;
    EXPECT_EQ(r.dense.total_macs, c.dense) << c.outputs << " " << c.frames;
  }
  const CostReport r = cost_report(build_table1(), 500);
  EXPECT_EQ(*r.ratio, (std::pair<std::uint64_t, std::uint64_t>{3233061, 357755}));
  EXPECT_EQ(r.window_size, 48u);
  EXPECT_EQ(r.spliced.evaluations, 453u);
}

TEST(FlopsTest, Table1PerWindow) {
  EXPECT_EQ(count_macs_windowed(build_table1(), 48).total_macs, 876994560ull);
  EXPECT_EQ(count_macs_windowed(build_table1(64), 48).total_macs, 844292096ull);
}

TEST(FlopsTest, Table1DenseCountsByLength) {
  const NetworkSpec dense = densify(build_table1()).net;
  EXPECT_EQ(count_macs_dense(dense, 100).total_macs, 5971353600ull);
  EXPECT_EQ(count_macs_dense(dense, 200).total_macs, 15468748800ull);
  EXPECT_EQ(count_macs_dense(dense, 1000).total_macs, 91447910400ull);
}

// Property: dilation moves taps but never adds any.
TEST(FlopsTest, DenseCountIgnoresDilation) {
  Xorshift64 rng(601);
  for (int i = 0; i < 100; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    NetworkSpec dense = densify(net).net;
    const std::size_t T = receptive_field_time(net) + 40;
    const CostFragment a = count_macs_dense(dense, T);
    for (LayerSpec& l : dense.layers)
      if (auto* c = std::get_if<ConvSpec>(&l)) c->dilation_t = 1;
    for (LayerSpec& l : dense.layers)
      if (auto* p = std::get_if<PoolSpec>(&l)) p->dilation_t = 1;
    const CostFragment b = count_macs_dense(dense, T);
    ASSERT_EQ(a.layers.size(), b.layers.size());
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
      const Shape3& sa = a.layers[k].output;
      const Shape3& sb = b.layers[k].output;
      const std::uint64_t per_a = sa.time ? a.layers[k].macs / sa.time : 0;
      const std::uint64_t per_b = sb.time ? b.layers[k].macs / sb.time : 0;
      ASSERT_EQ(per_a, per_b);
    }
  }
}

// Property: the report's structure-only count matches counting the fully
// densified network layer by layer.
TEST(FlopsTest, ReportMatchesDensifiedCount) {
  Xorshift64 rng(603);
  for (int i = 0; i < 100; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    const std::size_t T = receptive_field_time(net) + testing::pick(rng, 0, 50);
    const CostFragment want = count_macs_dense(densify(net).net, T);
    const CostFragment got = cost_report(net, T).dense;
    ASSERT_EQ(got.total_macs, want.total_macs);
    ASSERT_EQ(got.total_other_ops, want.total_other_ops);
    ASSERT_EQ(got.total_activations, want.total_activations);
    ASSERT_EQ(got.layers.size(), want.layers.size());
    for (std::size_t k = 0; k < got.layers.size(); ++k)
      ASSERT_EQ(got.layers[k].output, want.layers[k].output);
  }
}

// Property: the ratio does not decrease with utterance length.
TEST(FlopsTest, RatioIsMonotone) {
  Xorshift64 rng(602);
  for (int i = 0; i < 30; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    const std::size_t rf = receptive_field_time(net);
    double prev = 0.0;
    for (std::size_t T = rf; T < rf + 200; T += 7) {
      const double v = cost_report(net, T).ratio_value();
      ASSERT_GE(v, prev - 1e-12) << "net " << i << " T " << T;
      ASSERT_LE(v, static_cast<double>(rf));
      prev = v;
    }
  }
}

TEST(FlopsTest, RowsAreStable) {
  std::ostringstream a, b;
  write_report_rows(a, cost_report(build_fig1_toy(), 100));
  write_report_rows(b, cost_report(build_fig1_toy(), 100));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("total\t100\t8\t1953\t573\t651/191\nactivations\t930\t288\n"),
            std::string::npos);
}

}  // namespace
}  // namespace tdconv
