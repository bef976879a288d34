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

// Text network description.
//
//   tdconv-network 1
//   input 3 64 48
//   mode windowed
//   conv in=3 out=64 kernel=7x7 dilation=1x1 pad_f=3 weights=<b64> bias=<b64>
//   batchnorm channels=64 epsilon=1e-05 mean=<b64> variance=<b64> scale=<b64> shift=<b64>
//   relu
//   pool window=2x1 stride=2x1 dilation_t=1
//   flatten
//   fc in=3072 out=2048 weights=<b64> bias=<b64>
//
// One entry per line; '#' starts a comment. Sizes are written frequency x
// time. Blobs are base64 of little-endian binary32 arrays. The entry
//
//   sbn feat=16 window=11 hidden1=32,32 bottleneck=8 hidden2=32 outputs=10
//       offsets=-10,-5,0,5,10 seed=1
//
// (on one line) expands to the CNN form of a seeded stacked bottleneck
// network.
//
// parse_network raises ParseError (line, column) for malformed text and
// ShapeError (layer index) when the layers do not fit together.

#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "tdconv/errors.hpp"
#include "tdconv/network.hpp"
#include "tdconv/sbn.hpp"

namespace tdconv {

inline constexpr std::string_view kNetworkMagic = "tdconv-network";
inline constexpr int kNetworkVersion = 1;

namespace detail {

inline std::string base64_encode(std::string_view bytes) {
  namespace it = boost::archive::iterators;
  using Encoder = it::base64_from_binary<
      it::transform_width<std::string_view::const_iterator, 6, 8>>;
  std::string out(Encoder(bytes.begin()), Encoder(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

// Empty optional on malformed input.
inline std::optional<std::string> base64_decode(std::string_view text) {
  namespace it = boost::archive::iterators;
  if (text.size() % 4 != 0) return std::nullopt;
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  std::string body(text.substr(0, text.size() - pad));
  for (char c : body) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '+' || c == '/';
    if (!ok) return std::nullopt;
  }
  body.append(pad, 'A');
  using Decoder =
      it::transform_width<it::binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string out(Decoder(body.begin()), Decoder(body.end()));
  out.resize(out.size() - pad);
  return out;
}

inline std::string floats_to_base64(const std::vector<float>& values) {
  std::string bytes;
  bytes.reserve(values.size() * 4);
  for (float v : values) {
    const std::uint32_t u = to_little_endian(std::bit_cast<std::uint32_t>(v));
    bytes.append(reinterpret_cast<const char*>(&u), 4);
  }
  return base64_encode(bytes);
}

inline std::string format_float(float v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#')
      ++i;
    tokens.push_back(Token{line.substr(start, i - start), start + 1});
  }
  return tokens;
}

// key=value arguments of one entry, with positions for error messages.
class EntryArgs {
 public:
  EntryArgs(std::size_t line, const std::vector<Token>& tokens) : line_(line) {
    keyword_column_ = tokens.front().column;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const Token& tok = tokens[i];
      const auto eq = tok.text.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw ParseError(line_, tok.column, "expected key=value, got '" +
                                                std::string(tok.text) + "'");
      const std::string key(tok.text.substr(0, eq));
      if (args_.count(key))
        throw ParseError(line_, tok.column, "duplicate key '" + key + "'");
      args_[key] = Arg{tok.text.substr(eq + 1), tok.column + eq + 1, false};
    }
  }

  std::size_t count(const std::string& key) {
    auto& a = get(key);
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(a.value.data(), a.value.data() + a.value.size(), v);
    if (ec != std::errc{} || p != a.value.data() + a.value.size())
      throw ParseError(line_, a.column, "expected a non-negative integer for '" + key + "'");
    return v;
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) {
    return args_.count(key) ? count(key) : fallback;
  }

  // "AxB" pair, frequency first.
  std::pair<std::size_t, std::size_t> pair(const std::string& key) {
    auto& a = get(key);
    const auto x = a.value.find('x');
    std::size_t f = 0, t = 0;
    bool ok = x != std::string_view::npos;
    if (ok) {
      auto r1 = std::from_chars(a.value.data(), a.value.data() + x, f);
      auto r2 = std::from_chars(a.value.data() + x + 1, a.value.data() + a.value.size(), t);
      ok = r1.ec == std::errc{} && r1.ptr == a.value.data() + x && r2.ec == std::errc{} &&
           r2.ptr == a.value.data() + a.value.size();
    }
    if (!ok) throw ParseError(line_, a.column, "expected FxT for '" + key + "'");
    return {f, t};
  }

  float real(const std::string& key) {
    auto& a = get(key);
    float v = 0.0f;
    auto [p, ec] = std::from_chars(a.value.data(), a.value.data() + a.value.size(), v);
    if (ec != std::errc{} || p != a.value.data() + a.value.size())
      throw ParseError(line_, a.column, "expected a number for '" + key + "'");
    return v;
  }

  std::vector<float> floats(const std::string& key, std::size_t expected) {
    auto& a = get(key);
    auto bytes = base64_decode(a.value);
    if (!bytes) throw ParseError(line_, a.column, "malformed base64 in '" + key + "'");
    if (bytes->size() != expected * 4)
      throw ParseError(line_, a.column,
                       "'" + key + "' holds " + std::to_string(bytes->size() / 4) +
                           " values, expected " + std::to_string(expected));
    std::vector<float> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
      std::uint32_t u = 0;
      std::memcpy(&u, bytes->data() + 4 * i, 4);
      out[i] = std::bit_cast<float>(to_little_endian(u));
    }
    return out;
  }

  template <typename Int>
  std::vector<Int> list(const std::string& key) {
    auto& a = get(key);
    std::vector<Int> out;
    std::string_view rest = a.value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      Int v{};
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || ec != std::errc{} || p != item.data() + item.size())
        throw ParseError(line_, a.column, "expected a comma-separated list for '" + key + "'");
      out.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  void finish() {
    for (auto& [key, a] : args_)
      if (!a.used)
        throw ParseError(line_, a.column - key.size() - 1, "unknown key '" + key + "'");
  }

 private:
  struct Arg {
    std::string_view value;
    std::size_t column;
    bool used;
  };

  Arg& get(const std::string& key) {
    auto it = args_.find(key);
    if (it == args_.end())
      throw ParseError(line_, keyword_column_, "missing key '" + key + "'");
    it->second.used = true;
    return it->second;
  }

  std::size_t line_;
  std::size_t keyword_column_ = 1;
  std::map<std::string, Arg> args_;
};

inline LayerSpec parse_conv(EntryArgs& a) {
  ConvSpec c;
  c.in_maps = a.count("in");
  c.out_maps = a.count("out");
  std::tie(c.kernel_f, c.kernel_t) = a.pair("kernel");
  std::tie(c.dilation_f, c.dilation_t) = a.pair("dilation");
  c.pad_f = a.count_or("pad_f", 0);
  c.weights = a.floats("weights", c.out_maps * c.taps());
  c.bias = a.floats("bias", c.out_maps);
  return c;
}

inline LayerSpec parse_pool(EntryArgs& a) {
  PoolSpec p;
  std::tie(p.window_f, p.window_t) = a.pair("window");
  std::tie(p.stride_f, p.stride_t) = a.pair("stride");
  p.dilation_t = a.count_or("dilation_t", 1);
  return p;
}

inline LayerSpec parse_batchnorm(EntryArgs& a) {
  BatchNormSpec b;
  const std::size_t n = a.count("channels");
  b.epsilon = a.real("epsilon");
  b.mean = a.floats("mean", n);
  b.variance = a.floats("variance", n);
  b.scale = a.floats("scale", n);
  b.shift = a.floats("shift", n);
  return b;
}

inline LayerSpec parse_fc(EntryArgs& a) {
  FullyConnectedSpec f;
  f.in_dim = a.count("in");
  f.out_dim = a.count("out");
  f.weights = a.floats("weights", f.in_dim * f.out_dim);
  f.bias = a.floats("bias", f.out_dim);
  return f;
}

inline std::vector<LayerSpec> parse_sbn(EntryArgs& a, std::size_t line,
                                        std::size_t column) {
  SbnDims dims;
  dims.feat_dim = a.count("feat");
  dims.window = a.count("window");
  dims.hidden1 = a.list<std::size_t>("hidden1");
  dims.bottleneck = a.count("bottleneck");
  dims.hidden2 = a.list<std::size_t>("hidden2");
  dims.outputs = a.count("outputs");
  dims.offsets = a.list<int>("offsets");
  dims.auxiliary.clear();
  const std::uint64_t seed = a.count("seed");
  try {
    return build_sbn_as_cnn(make_sbn(dims, seed)).layers;
  } catch (const ShapeError& e) {
    throw ParseError(line, column, e.what());
  }
}

}  // namespace detail

inline NetworkSpec parse_network(std::string_view text) {
  NetworkSpec net;
  bool have_header = false, have_input = false, have_mode = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto tokens = detail::tokenize(line);
    if (tokens.empty()) continue;
    const detail::Token& head = tokens.front();

    if (!have_header) {
      if (head.text != kNetworkMagic)
        throw ParseError(line_no, head.column,
                         "expected header '" + std::string(kNetworkMagic) + " 1'");
      int version = 0;
      if (tokens.size() != 2 ||
          std::from_chars(tokens[1].text.data(), tokens[1].text.data() + tokens[1].text.size(),
                          version).ec != std::errc{} ||
          version != kNetworkVersion)
        throw ParseError(line_no, tokens.size() > 1 ? tokens[1].column : head.column,
                         "unsupported format version");
      have_header = true;
      continue;
    }

    if (head.text == "input") {
      if (tokens.size() != 4)
        throw ParseError(line_no, head.column, "input needs fmaps freq time");
      std::size_t dims[3];
      for (int i = 0; i < 3; ++i) {
        const auto& t = tokens[1 + i].text;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), dims[i]);
        if (ec != std::errc{} || p != t.data() + t.size() || dims[i] == 0)
          throw ParseError(line_no, tokens[1 + i].column, "expected a positive integer");
      }
      net.input_shape = Shape3{dims[0], dims[1], dims[2]};
      have_input = true;
      continue;
    }
    if (head.text == "mode") {
      if (tokens.size() != 2)
        throw ParseError(line_no, head.column, "mode needs one value");
      const auto v = tokens[1].text;
      if (v == "windowed") net.mode = NetworkMode::windowed;
      else if (v == "dense") net.mode = NetworkMode::dense;
      else if (v == "strided") net.mode = NetworkMode::strided;
      else throw ParseError(line_no, tokens[1].column, "unknown mode '" + std::string(v) + "'");
      have_mode = true;
      continue;
    }

    if (head.text == "relu" || head.text == "flatten") {
      if (tokens.size() != 1)
        throw ParseError(line_no, tokens[1].column, "unexpected argument");
      if (head.text == "relu") net.layers.emplace_back(ReluSpec{});
      else net.layers.emplace_back(FlattenSpec{});
      continue;
    }

    detail::EntryArgs args(line_no, tokens);
    if (head.text == "conv") net.layers.push_back(detail::parse_conv(args));
    else if (head.text == "pool") net.layers.push_back(detail::parse_pool(args));
    else if (head.text == "batchnorm") net.layers.push_back(detail::parse_batchnorm(args));
    else if (head.text == "fc") net.layers.push_back(detail::parse_fc(args));
    else if (head.text == "sbn") {
      for (auto& l : detail::parse_sbn(args, line_no, head.column)) net.layers.push_back(std::move(l));
    } else {
      throw ParseError(line_no, head.column, "unknown entry '" + std::string(head.text) + "'");
    }
    args.finish();
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, 1, "empty network description");
  if (!have_input) throw ParseError(line_no, 1, "missing 'input' entry");
  if (!have_mode) throw ParseError(line_no, 1, "missing 'mode' entry");
  infer_shapes(net);
  return net;
}

inline std::string serialize_network(const NetworkSpec& net) {
  using detail::floats_to_base64;
  std::ostringstream os;
  os << kNetworkMagic << " " << kNetworkVersion << "\n";
  os << "input " << net.input_shape.fmaps << " " << net.input_shape.freq << " "
     << net.input_shape.time << "\n";
  os << "mode " << to_string(net.mode) << "\n";
  for (const LayerSpec& layer : net.layers) {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, ConvSpec>) {
            os << "conv in=" << l.in_maps << " out=" << l.out_maps << " kernel="
               << l.kernel_f << "x" << l.kernel_t << " dilation=" << l.dilation_f << "x"
               << l.dilation_t << " pad_f=" << l.pad_f
               << " weights=" << floats_to_base64(l.weights)
               << " bias=" << floats_to_base64(l.bias);
          } else if constexpr (std::is_same_v<T, PoolSpec>) {
            os << "pool window=" << l.window_f << "x" << l.window_t << " stride="
               << l.stride_f << "x" << l.stride_t << " dilation_t=" << l.dilation_t;
          } else if constexpr (std::is_same_v<T, BatchNormSpec>) {
            os << "batchnorm channels=" << l.channels()
               << " epsilon=" << detail::format_float(l.epsilon)
               << " mean=" << floats_to_base64(l.mean)
               << " variance=" << floats_to_base64(l.variance)
               << " scale=" << floats_to_base64(l.scale)
               << " shift=" << floats_to_base64(l.shift);
          } else if constexpr (std::is_same_v<T, FullyConnectedSpec>) {
            os << "fc in=" << l.in_dim << " out=" << l.out_dim
               << " weights=" << floats_to_base64(l.weights)
               << " bias=" << floats_to_base64(l.bias);
          } else if constexpr (std::is_same_v<T, ReluSpec>) {
            os << "relu";
          } else {
            os << "flatten";
          }
        },
        layer);
    os << "\n";
  }
  return os.str();
}

}  // namespace tdconv
