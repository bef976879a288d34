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

#include <bit>
#include <cstdint>
#include <limits>
#include <string>

#include "tdconv/architectures.hpp"
#include "tdconv/densify.hpp"
#include "tdconv/network_io.hpp"
#include "tdconv/sbn.hpp"

namespace tdconv {
namespace {

const char* kToyText =
    "tdconv-network 1\n"
    "# two convs around a strided pool\n"
    "input 1 1 8\n"
    "mode windowed\n"
    "conv in=1 out=1 kernel=1x3 dilation=1x1 weights=AACAPwAAAEAAAEBA bias=AAAAAA==\n"
    "pool window=1x2 stride=1x2   # dilation_t defaults to 1\n"
    "conv in=1 out=1 kernel=1x3 dilation=1x1 pad_f=0 weights=AACAPwAAgL8AAAA/ "
    "bias=AACAPw==\n";

ParseError parse_error_of(const std::string& text) {
  try {
    parse_network(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no parse error for:\n" << text;
  return ParseError(0, 0, "");
}

TEST(NetworkIoTest, ParsesHandWrittenFile) {
  const NetworkSpec net = parse_network(kToyText);
  EXPECT_EQ(net.input_shape, (Shape3{1, 1, 8}));
  ASSERT_EQ(net.layers.size(), 3u);
  EXPECT_EQ(std::get<ConvSpec>(net.layers[0]).weights, (std::vector<float>{1, 2, 3}));
  EXPECT_EQ(std::get<ConvSpec>(net.layers[2]).weights, (std::vector<float>{1, -1, 0.5f}));
  EXPECT_EQ(std::get<ConvSpec>(net.layers[2]).bias, (std::vector<float>{1}));
  EXPECT_EQ(std::get<PoolSpec>(net.layers[1]), (PoolSpec{1, 2, 1, 2, 1}));
  const Tensor3 ramp(Shape3{1, 1, 8}, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(forward(net, ramp)(0, 0, 0), 11.0f);
}

TEST(NetworkIoTest, Table1RoundTrip) {
  const NetworkSpec net = build_table1(64, 3);
  const std::string text = serialize_network(net);
  const NetworkSpec back = parse_network(text);
  EXPECT_EQ(back, net);
  EXPECT_EQ(serialize_network(back), text);
}

TEST(NetworkIoTest, DenseAndRandomRoundTrip) {
  const NetworkSpec dense = densify(build_fig1_toy(4, 2)).net;
  EXPECT_EQ(parse_network(serialize_network(dense)), dense);
  Xorshift64 rng(301);
  for (int i = 0; i < 50; ++i) {
    const NetworkSpec net = random_windowed_network(rng);
    ASSERT_EQ(parse_network(serialize_network(net)), net);
    const NetworkSpec d = densify(net).net;
    ASSERT_EQ(parse_network(serialize_network(d)), d);
  }
}

TEST(NetworkIoTest, SpecialFloatsKeepTheirBits) {
  NetworkSpec net = build_fig1_toy();
  auto& w = std::get<ConvSpec>(net.layers[0]).weights;
  w = {-0.0f, std::numeric_limits<float>::denorm_min(),
       std::bit_cast<float>(0x7fc01234u)};
  const NetworkSpec back = parse_network(serialize_network(net));
  const auto& v = std::get<ConvSpec>(back.layers[0]).weights;
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(std::bit_cast<std::uint32_t>(v[i]), std::bit_cast<std::uint32_t>(w[i]));
}

TEST(NetworkIoTest, SbnEntryExpandsToCnn) {
  const std::string text =
      "tdconv-network 1\ninput 1 4 13\nmode dense\n"
      "sbn feat=4 window=3 hidden1=6 bottleneck=2 hidden2= outputs=3 offsets=-2,0,2,4,6,8 seed=9\n";
  SbnDims dims;
  dims.feat_dim = 4;
  dims.window = 3;
  dims.hidden1 = {6};
  dims.bottleneck = 2;
  dims.hidden2 = {};
  dims.outputs = 3;
  dims.offsets = {-2, 0, 2, 4, 6, 8};
  dims.auxiliary = {};
  EXPECT_EQ(parse_network(text), build_sbn_as_cnn(make_sbn(dims, 9)));
}

TEST(NetworkIoTest, SyntaxErrorsCarryPosition) {
  const std::string head = "tdconv-network 1\ninput 1 1 8\nmode windowed\n";
  ParseError e = parse_error_of(head + "conv in=1 out=1 kernel=1x3 dilation=1x1 weights=AACAPwAAAEAAAEBA bias=AAAAAA==\n  convolution x=1\n");
  EXPECT_EQ(e.line(), 5u);
  EXPECT_EQ(e.column(), 3u);

  e = parse_error_of("tdconv-network 2\n");
  EXPECT_EQ(e.line(), 1u);
  EXPECT_EQ(e.column(), 16u);

  e = parse_error_of("input 1 1 8\n");
  EXPECT_EQ(e.line(), 1u);

  e = parse_error_of(head + "pool window=1x2 stride=1x2 extra=3\n");
  EXPECT_EQ(e.line(), 4u);
  EXPECT_EQ(e.column(), 28u);

  e = parse_error_of(head + "pool window=1x2 window=1x2 stride=1x2\n");
  EXPECT_EQ(e.column(), 17u);

  e = parse_error_of(head + "pool window=12 stride=1x2\n");
  EXPECT_EQ(e.column(), 13u);

  e = parse_error_of(head + "conv in=1 out=1 kernel=1x3 dilation=1x1 weights=AACAPw== bias=AAAAAA==\n");
  EXPECT_EQ(e.column(), 49u);  // one value where three are needed

  e = parse_error_of(head + "conv in=1 out=1 kernel=1x1 dilation=1x1 weights=AAC*Pw== bias=AAAAAA==\n");
  EXPECT_EQ(e.column(), 49u);

  e = parse_error_of(head + "relu now\n");
  EXPECT_EQ(e.column(), 6u);

  e = parse_error_of("tdconv-network 1\ninput 1 1 8\n");
  EXPECT_NE(std::string(e.what()).find("mode"), std::string::npos);

  e = parse_error_of("tdconv-network 1\nmode sideways\n");
  EXPECT_EQ(e.column(), 6u);

  e = parse_error_of("");
  EXPECT_EQ(e.line(), 1u);
}

TEST(NetworkIoTest, InconsistentLayersAreShapeErrors) {
  // The conv stack of the toy net yields 1 value; the fc asks for 2.
  const std::string text =
      "tdconv-network 1\ninput 1 1 3\nmode windowed\n"
      "conv in=1 out=1 kernel=1x3 dilation=1x1 weights=AACAPwAAAEAAAEBA bias=AAAAAA==\n"
      "flatten\n"
      "fc in=2 out=1 weights=AACAPwAAAEA= bias=AAAAAA==\n";
  try {
    parse_network(text);
    FAIL() << "expected a shape error";
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer_index(), 2u);
  }
}

TEST(NetworkIoTest, Base64) {
  EXPECT_EQ(detail::base64_encode(""), "");
  EXPECT_EQ(detail::base64_encode("f"), "Zg==");
  EXPECT_EQ(detail::base64_encode("fo"), "Zm8=");
  EXPECT_EQ(detail::base64_encode("foo"), "Zm9v");
  EXPECT_EQ(detail::base64_encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(detail::base64_decode("Zm9vYmE="), std::optional<std::string>("fooba"));
  EXPECT_EQ(detail::base64_decode("Zg=="), std::optional<std::string>("f"));
  EXPECT_FALSE(detail::base64_decode("Zg="));
  EXPECT_FALSE(detail::base64_decode("Z!=="));
}

}  // namespace
}  // namespace tdconv
