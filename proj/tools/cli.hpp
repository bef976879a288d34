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

// The `tdconv` command line: describe, densify, verify, flops and eval.
//
// Exit codes: 0 success or verification pass, 1 verification failure,
// 2 usage, parse, shape or I/O error.
//
// A network argument is either a file in the network description format or
// one of the built-in names `table1`, `table1:<outputs>`, `fig1-toy` and
// `sbn-default`, whose weights come from --weight-seed.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tdconv/tdconv.hpp"

namespace tdconv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

enum class OutputFormat { text, rows };

struct CliConfig {
  std::string subcommand;
  std::string network;
  // Utterance source: a tensor dump, or synthetic with `seed` and `length`.
  std::string input_path;
  std::optional<std::size_t> length;
  std::uint64_t seed = 1;
  std::uint64_t weight_seed = 1;
  double tolerance = 0.0;
  SummationOrder order = SummationOrder::fixed;
  bool pad = false;
  unsigned threads = 1;
  OutputFormat format = OutputFormat::text;
  std::string output_path;
  // verify: a dense network to check instead of densifying `network`.
  std::string dense_path;
  std::string mode = "dense";
  bool all_layers = false;
};

// A resolved network argument. `sbn` is set for `sbn-default`, whose
// reference path is the two-stage evaluation rather than splicing.
struct LoadedNetwork {
  NetworkSpec net;
  std::optional<SbnSpec> sbn;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LoadedNetwork load_network(const std::string& name, std::uint64_t weight_seed) {
  if (name == "table1") return {build_table1(32000, weight_seed), std::nullopt};
  if (name.starts_with("table1:")) {
    std::size_t outputs = 0;
    const char* first = name.data() + 7;
    const char* last = name.data() + name.size();
    const auto [p, ec] = std::from_chars(first, last, outputs);
    if (ec != std::errc() || p != last || outputs == 0)
      throw Error("bad output count in '" + name + "'");
    return {build_table1(outputs, weight_seed), std::nullopt};
  }
  if (name == "fig1-toy") return {build_fig1_toy(weight_seed), std::nullopt};
  if (name == "sbn-default") {
    SbnSpec spec = make_sbn(SbnDims{}, weight_seed);
    NetworkSpec net = build_sbn_as_cnn(spec);
    return {std::move(net), std::move(spec)};
  }
  return {parse_network(read_file(name)), std::nullopt};
}

inline std::size_t receptive_field(const LoadedNetwork& n) {
  return n.sbn ? n.sbn->receptive_field() : receptive_field_time(n.net);
}

inline Tensor3 load_utterance(const CliConfig& cfg, const LoadedNetwork& n) {
  Tensor3 utt = [&] {
    if (!cfg.input_path.empty()) {
      std::ifstream in(cfg.input_path, std::ios::binary);
      if (!in) throw IoError("cannot open " + cfg.input_path);
      return read_dump(in);
    }
    if (!cfg.length) throw Error("an utterance is needed: pass --input or --len");
    return seeded_random(n.net.input_shape.fmaps, n.net.input_shape.freq, *cfg.length,
                         cfg.seed);
  }();
  if (cfg.pad) {
    const std::size_t extra = receptive_field(n) - 1;
    utt = pad_time(utt, extra / 2, extra - extra / 2);
  }
  return utt;
}

inline int cmd_describe(const CliConfig& cfg, std::ostream& out) {
  const LoadedNetwork n = load_network(cfg.network, cfg.weight_seed);
  ShapeTrace trace;
  if (cfg.length) {
    trace = infer_shapes(n.net, Shape3{n.net.input_shape.fmaps, n.net.input_shape.freq,
                                       *cfg.length});
  } else {
    trace = infer_shapes(n.net);
  }
  if (cfg.format == OutputFormat::rows) {
    write_shape_rows(out, n.net, trace);
    out << "rf\t" << receptive_field(n) << "\n";
  } else {
    write_shape_table(out, n.net, trace, cfg.all_layers);
    out << "receptive field: " << receptive_field(n) << "\n";
  }
  return kExitOk;
}

inline int cmd_densify(const CliConfig& cfg, std::ostream& out) {
  const LoadedNetwork n = load_network(cfg.network, cfg.weight_seed);
  const DensifyResult result = densify(n.net);
  if (!cfg.output_path.empty()) {
    std::ofstream file(cfg.output_path, std::ios::binary);
    if (!file) throw IoError("cannot write " + cfg.output_path);
    file << serialize_network(result.net);
    if (!file) throw IoError("failed writing " + cfg.output_path);
  }
  if (cfg.format == OutputFormat::rows) write_report_rows(out, result.report);
  else write_report(out, result.report);
  return kExitOk;
}

inline int cmd_verify(const CliConfig& cfg, std::ostream& out) {
  const LoadedNetwork n = load_network(cfg.network, cfg.weight_seed);
  const Tensor3 utt = load_utterance(cfg, n);
  const VerifyOptions options{cfg.order, cfg.threads};
  EquivalenceReport report;
  if (n.sbn) {
    const NetworkSpec dense =
        cfg.dense_path.empty() ? n.net : parse_network(read_file(cfg.dense_path));
    report = compare_sequences(eval_sbn_two_stage(*n.sbn, utt),
                               eval_dense(dense, utt, cfg.order), cfg.tolerance);
  } else if (!cfg.dense_path.empty()) {
    report = compare_paths(n.net, parse_network(read_file(cfg.dense_path)), utt,
                           cfg.tolerance, options);
  } else {
    report = verify_equivalence(n.net, utt, cfg.tolerance, options);
  }
  if (cfg.format == OutputFormat::rows) write_report_rows(out, report);
  else write_report(out, report);
  return report.passed ? kExitOk : kExitFail;
}

inline int cmd_flops(const CliConfig& cfg, std::ostream& out) {
  if (!cfg.length) throw Error("flops needs --len");
  const LoadedNetwork n = load_network(cfg.network, cfg.weight_seed);
  const CostReport report = cost_report(n.net, *cfg.length);
  if (cfg.format == OutputFormat::rows) write_report_rows(out, report);
  else write_report(out, report);
  return kExitOk;
}

inline int cmd_eval(const CliConfig& cfg, std::ostream& out) {
  const LoadedNetwork n = load_network(cfg.network, cfg.weight_seed);
  const Tensor3 utt = load_utterance(cfg, n);
  Tensor3 result = [&] {
    if (cfg.mode == "spliced") {
      if (n.sbn) return eval_sbn_two_stage(*n.sbn, utt);
      return eval_spliced(n.net, utt, cfg.threads);
    }
    if (n.net.mode == NetworkMode::windowed)
      return eval_dense(densify(n.net).net, utt, cfg.order);
    return eval_dense(n.net, utt, cfg.order);
  }();
  std::ofstream file(cfg.output_path, std::ios::binary);
  if (!file) throw IoError("cannot write " + cfg.output_path);
  write_dump(file, result);
  if (cfg.format == OutputFormat::rows) {
    out << "eval\t" << cfg.mode << "\t" << result.fmaps() << "\t" << result.freq()
        << "\t" << result.time() << "\n";
  } else {
    out << "wrote " << to_string(result.shape()) << " to " << cfg.output_path << "\n";
  }
  return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Dense evaluation of windowed CNN acoustic models", "tdconv"};
  app.require_subcommand(1);

  const std::map<std::string, OutputFormat> formats{{"text", OutputFormat::text},
                                                    {"rows", OutputFormat::rows}};
  const std::map<std::string, SummationOrder> orders{
      {"fixed", SummationOrder::fixed}, {"reordered", SummationOrder::reordered}};

  auto add_network = [&](CLI::App* sub) {
    sub->add_option("network", cfg.network,
                    "network file, or table1[:outputs], fig1-toy, sbn-default")
        ->required();
    sub->add_option("--weight-seed", cfg.weight_seed, "seed for built-in network weights");
    sub->add_option("--format", cfg.format, "output format: text or rows")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  };
  auto add_utterance = [&](CLI::App* sub) {
    auto* input = sub->add_option("--input", cfg.input_path, "utterance tensor dump");
    auto* len = sub->add_option("--len", cfg.length, "synthetic utterance length in frames");
    auto* seed = sub->add_option("--seed", cfg.seed, "synthetic utterance seed");
    input->excludes(len)->excludes(seed);
    sub->add_flag("--pad", cfg.pad, "zero-pad so every input frame gets an output");
    sub->add_option("--order", cfg.order, "dense summation order: fixed or reordered")
        ->transform(CLI::CheckedTransformer(orders, CLI::ignore_case));
    sub->add_option("--threads", cfg.threads, "workers for spliced evaluation")
        ->check(CLI::Range(1u, 1024u));
  };

  auto* describe = app.add_subcommand("describe", "print the layer shape table");
  add_network(describe);
  describe->add_option("--len", cfg.length, "trace shapes at this input length");
  describe->add_flag("--all-layers", cfg.all_layers, "list batch norm, relu and flatten too");

  auto* densify_cmd = app.add_subcommand("densify", "rewrite a windowed net for dense evaluation");
  add_network(densify_cmd);
  densify_cmd->add_option("-o,--output", cfg.output_path, "write the dense network here");

  auto* verify = app.add_subcommand("verify", "compare spliced and dense outputs");
  add_network(verify);
  add_utterance(verify);
  verify->add_option("--tol", cfg.tolerance, "max absolute difference")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--dense", cfg.dense_path,
                     "dense network file to check instead of densifying");

  auto* flops = app.add_subcommand("flops", "count multiply-accumulates of both paths");
  add_network(flops);
  flops->add_option("--len", cfg.length, "utterance length in frames")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a network and write a tensor dump");
  add_network(eval);
  add_utterance(eval);
  eval->add_option("--mode", cfg.mode, "spliced or dense")
      ->check(CLI::IsMember({"spliced", "dense"}));
  eval->add_option("-o,--output", cfg.output_path, "output tensor dump")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse error is a usage error.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();
  try {
    if (cfg.subcommand == "describe") return cmd_describe(cfg, out);
    if (cfg.subcommand == "densify") return cmd_densify(cfg, out);
    if (cfg.subcommand == "verify") return cmd_verify(cfg, out);
    if (cfg.subcommand == "flops") return cmd_flops(cfg, out);
    return cmd_eval(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace tdconv::cli
