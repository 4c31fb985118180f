// Copyright 2026 The fpdel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "cli.hpp"
#include "fpdel/error.hpp"

namespace fpdel::cli {
namespace {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string read_stdin() {
  std::ostringstream ss;
  ss << std::cin.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text) || !f.flush()) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, "cannot create '" + dir.string() + "'");
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto logger = std::make_shared<spdlog::logger>("fpdel", std::make_shared<spdlog::sinks::ostream_sink_st>(err));
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("FPDEL_LOG")) logger->set_level(spdlog::level::from_str(env));
  return logger;
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::kIo ? kExitIo : kExitUsage; }

struct VerifyFlags {
  std::string circuit;
  std::vector<std::string> inputs;
  std::string malicious;
  unsigned n = 6;
  unsigned m = 6;
  int counter_bits = -1;
  std::size_t slots = 3;
  std::size_t fp_slot = 2;
  unsigned depth = 4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--circuit", circuit, "Circuit JSON file")->required();
    cmd->add_option("--input", inputs, "name=value (SIMD: name=v1,v2,...)");
    cmd->add_option("--n", n, "Computation bits");
    cmd->add_option("--m", m, "Fingerprint bits");
    cmd->add_option("--counter-bits", counter_bits, "Multiplication counter bits (default: derived)");
    cmd->add_option("--slots", slots, "SIMD slot count");
    cmd->add_option("--fp-slot", fp_slot, "SIMD fingerprint slot");
    cmd->add_option("--depth", depth, "SIMD multiplicative depth budget");
  }

  VerifyOptions options() const {
    VerifyOptions o;
    for (const auto& kv : inputs) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::kParse, "--input expects name=value, got '" + kv + "'");
      o.inputs[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!malicious.empty()) o.malicious = malicious;
    o.layout = fp::WordLayout::Make(n, m);
    if (counter_bits >= 0) o.counter_bits = static_cast<unsigned>(counter_bits);
    o.slot_count = slots;
    o.fp_slot = fp_slot;
    o.depth_budget = depth;
    return o;
  }

  circuit::Circuit load() const { return circuit::Circuit::Parse(read_text(circuit)); }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);

  CLI::App app{"Fingerprint-verified delegation of homomorphic computations", "fpdel"};
  app.require_subcommand(1);

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "Run a worked example");
  demo->add_option("name", demo_name, "Demo name")->required();

  std::string config_path;
  ExperimentOverrides overrides;
  std::string format = "json";
  auto* experiment = app.add_subcommand("experiment", "Run attack experiments from a config file");
  experiment->add_option("--config", config_path, "Experiment config JSON")->required();
  experiment->add_option("--seed", overrides.seed, "Seed override");
  experiment->add_option("--trials", overrides.trials, "Trial count override");
  experiment->add_option("--out", overrides.out_dir, "Directory for stats.csv and trials.jsonl");
  experiment->add_option("--format", format, "stdout format")->check(CLI::IsMember({"json", "csv"}));

  VerifyFlags vflags;
  auto* verify = app.add_subcommand("verify", "Delegate, serve and verify in one process");
  vflags.attach(verify);
  verify->add_option("--malicious", vflags.malicious,
                     "omit-<input>, duplicate-<input>, skip-exp, reorder[-k], forge[-k]");

  VerifyFlags dflags;
  std::string request_out;
  std::string context_out;
  auto* delegate = app.add_subcommand("delegate", "Write a request envelope and the secret context");
  dflags.attach(delegate);
  delegate->add_option("--request", request_out, "Request output file")->required();
  delegate->add_option("--context", context_out, "Context output file")->required();

  std::string request_in;
  auto* serve = app.add_subcommand("serve", "Serve a request envelope honestly (stdin by default)");
  serve->add_option("--request", request_in, "Request file");

  std::string context_in;
  std::string response_in;
  auto* check = app.add_subcommand("check", "Verify a response envelope (stdin by default)");
  check->add_option("--context", context_in, "Context file")->required();
  check->add_option("--response", response_in, "Response file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*demo) {
      const auto r = cmd_demo(demo_name);
      out << r.report.dump(2) << '\n';
      return r.exit_code;
    }
    if (*experiment) {
      const auto cfg = ExperimentConfig::FromJson(parse_json(read_text(config_path), "config"));
      if (!overrides.out_dir) overrides.out_dir = cfg.out_dir;
      log->info("running {} experiment(s)", cfg.experiments.size());
      const auto result = run_experiments(cfg, overrides);
      if (overrides.out_dir) {
        const std::filesystem::path dir(*overrides.out_dir);
        make_dir(dir);
        write_text(dir / "stats.csv", result.csv);
        write_text(dir / "trials.jsonl", result.jsonl);
        log->info("wrote {}", dir.string());
      }
      if (format == "csv") {
        out << result.csv;
      } else {
        out << result.summary.dump(2) << '\n';
      }
      return kExitOk;
    }
    if (*verify) {
      const auto c = vflags.load();
      const auto r = cmd_verify(c, vflags.options());
      out << r.report.dump(2) << '\n';
      return r.exit_code;
    }
    if (*delegate) {
      const auto c = dflags.load();
      const auto d = cmd_delegate(c, dflags.options());
      write_text(request_out, d.request.dump() + "\n");
      write_text(context_out, d.context.dump() + "\n");
      out << json{{"request", request_out}, {"context", context_out}}.dump(2) << '\n';
      return kExitOk;
    }
    if (*serve) {
      const auto req = parse_json(request_in.empty() ? read_stdin() : read_text(request_in), "request");
      out << cmd_serve(req).dump() << '\n';
      return kExitOk;
    }
    if (*check) {
      const auto ctx = parse_json(read_text(context_in), "context");
      const auto resp = parse_json(response_in.empty() ? read_stdin() : read_text(response_in), "response");
      const auto r = cmd_check(ctx, resp);
      out << r.report.dump(2) << '\n';
      return r.exit_code;
    }
  } catch (const Error& e) {
    log->error("{}", e.what());
    return exit_code_for(e);
  } catch (const json::exception& e) {
    log->error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fpdel::cli
