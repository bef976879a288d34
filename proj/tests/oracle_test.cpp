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

#include <cmath>
#include <limits>
#include <sstream>

#include "tdconv/architectures.hpp"
#include "tdconv/densify.hpp"
#include "tdconv/oracle.hpp"
#include "test_util.hpp"

namespace tdconv {
namespace {

using testing::bit_equal;

TEST(OracleTest, SplicedMatchesWindowedForward) {
  Xorshift64 rng(501);
  for (int i = 0; i < 30; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    const std::size_t rf = net.input_shape.time;
    const std::size_t T = rf + testing::pick(rng, 0, 20);
    const Tensor3 utt = seeded_random(net.input_shape.fmaps, net.input_shape.freq, T, i);
    const Tensor3 s = eval_spliced(net, utt);
    ASSERT_EQ(s.time(), T - rf + 1);
    for (std::size_t p = 0; p < s.time(); ++p) {
      const Tensor3 y = forward(net, slice_time(utt, p, rf));
      ASSERT_EQ(s.column(p), y.column(0)) << "net " << i << " position " << p;
    }
  }
}

TEST(OracleTest, PositionCounts) {
  const NetworkSpec net = build_fig1_toy(3);
  EXPECT_EQ(eval_spliced(net, seeded_random(1, 1, 8, 1)).time(), 1u);
  EXPECT_EQ(eval_spliced(net, seeded_random(1, 1, 11, 1)).time(), 4u);
  EXPECT_THROW(eval_spliced(net, seeded_random(1, 1, 7, 1)), InputTooShortError);
  EXPECT_THROW(eval_spliced(net, seeded_random(2, 1, 9, 1)), ShapeError);
  EXPECT_THROW(eval_dense(net, seeded_random(1, 1, 9, 1)), ModeError);
  EXPECT_THROW(eval_spliced(densify(net).net, seeded_random(1, 1, 9, 1)), ModeError);
}

TEST(OracleTest, DenseOnSingleWindow) {
  const NetworkSpec net = build_fig1_toy(5, 3);
  const Tensor3 utt = seeded_random(1, 1, 8, 2);
  EXPECT_TRUE(bit_equal(eval_dense(densify(net).net, utt), forward(net, utt)));
}

TEST(OracleTest, ZeroInputZeroBias) {
  NetworkSpec net = build_fig1_toy(5, 3);
  for (LayerSpec& l : net.layers)
    if (auto* c = std::get_if<ConvSpec>(&l)) std::fill(c->bias.begin(), c->bias.end(), 0.0f);
  const Tensor3 utt = zeros(1, 1, 30);
  EXPECT_EQ(eval_dense(densify(net).net, utt), zeros(1, 1, 23));
  EXPECT_EQ(eval_spliced(net, utt), zeros(1, 1, 23));
}

TEST(OracleTest, Fig1ToyVerifiesExactly) {
  const NetworkSpec net = build_fig1_toy(42);
  const EquivalenceReport r = verify_equivalence(net, seeded_random(1, 1, 20, 42), 0.0);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.max_abs_diff, 0.0);
  EXPECT_EQ(r.positions, 13u);
  EXPECT_EQ(r.argmax_agreement, 1.0);
}

TEST(OracleTest, ThreadsDoNotChangeResults) {
  Xorshift64 rng(502);
  const NetworkSpec net = random_windowed_network(rng);
  const Tensor3 utt = seeded_random(net.input_shape.fmaps, net.input_shape.freq,
                                    net.input_shape.time + 70, 3);
  EXPECT_TRUE(bit_equal(eval_spliced(net, utt, 1), eval_spliced(net, utt, 4)));
}

// Property: random architectures agree exactly in fixed order, and within
// 1e-4 with reordered dense sums.
TEST(OracleTest, RandomNetworksVerify) {
  Xorshift64 rng(503);
  for (int i = 0; i < 40; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    const std::size_t T = net.input_shape.time + testing::pick(rng, 0, 30);
    const Tensor3 utt = seeded_random(net.input_shape.fmaps, net.input_shape.freq, T, i);
    const EquivalenceReport exact = verify_equivalence(net, utt, 0.0);
    ASSERT_TRUE(exact.passed) << "net " << i << " diff " << exact.max_abs_diff;
    ASSERT_EQ(exact.argmax_agreement, 1.0);
    const EquivalenceReport loose =
        verify_equivalence(net, utt, 1e-4, VerifyOptions{SummationOrder::reordered, 1});
    ASSERT_TRUE(loose.passed) << "net " << i << " diff " << loose.max_abs_diff;
  }
}

TEST(OracleTest, CompareSequences) {
  Tensor3 a(Shape3{2, 1, 3}, {1, 2, 3, 4, 5, 6});
  Tensor3 b = a;
  EquivalenceReport r = compare_sequences(a, b, 0.0);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.argmax_agreement, 1.0);

  b(0, 0, 1) = 2.5f;  // column 1 becomes (2.5, 5): argmax unchanged
  r = compare_sequences(a, b, 0.1);
  EXPECT_FALSE(r.passed);
  EXPECT_DOUBLE_EQ(r.max_abs_diff, 0.5);
  EXPECT_DOUBLE_EQ(r.max_rel_diff, 0.2);
  EXPECT_TRUE(compare_sequences(a, b, 0.5).passed);

  b(0, 0, 2) = 7.0f;  // column 2 argmax flips
  r = compare_sequences(a, b, 10.0);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.argmax_agreement, 2.0 / 3.0, 1e-12);

  b(1, 0, 0) = std::numeric_limits<float>::quiet_NaN();
  r = compare_sequences(a, b, 1e30);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(std::isinf(r.max_abs_diff));

  r = compare_sequences(a, Tensor3(Shape3{2, 1, 2}, {1, 2, 4, 5}), 0.0);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.shape_mismatch);
  EXPECT_EQ(r.positions, 2u);

  r = compare_sequences(a, Tensor3(Shape3{3, 1, 3}), 0.0);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.argmax_agreement, 0.0);
}

TEST(OracleTest, RowsOmitWallTime) {
  const NetworkSpec net = build_fig1_toy(42);
  const Tensor3 utt = seeded_random(1, 1, 20, 42);
  std::ostringstream a, b;
  write_report_rows(a, verify_equivalence(net, utt, 0.0));
  write_report_rows(b, verify_equivalence(net, utt, 0.0));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), "equivalence\tpass\t13\t13\t13\t0\t0\t1\t0\n");
}

}  // namespace
}  // namespace tdconv
