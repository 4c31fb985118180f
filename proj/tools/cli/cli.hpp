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

// The fpdel command line: worked demos, experiment runs, one-shot and
// two-process delegation.

#ifndef FPDEL_TOOLS_CLI_HPP_
#define FPDEL_TOOLS_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpdel/circuit.hpp"
#include "fpdel/fingerprint.hpp"

namespace fpdel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRejected = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;
};

// ---- demos -------------------------------------------------------------

const std::vector<std::string>& demo_names();

// Throws fpdel::Error(kInvalidArgument) for an unknown name.
CommandResult cmd_demo(std::string_view name);

// ---- experiments -------------------------------------------------------

struct ExperimentSpec {
  std::string name;
  std::string scenario;  // masking, overflow, subset, skip_exp, reorder_simd,
                         // consistent_lut, addition_sweep, lut_sweep
  std::optional<fp::WordLayout> layout;
  std::size_t inputs = 0;  // 0 = scenario default
  unsigned bound = 0;
  std::optional<std::uint64_t> reps;
  bool defended = true;
  bool open_luts = false;
  unsigned max_ops = 0;
  std::size_t keys = 2;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  std::vector<ExperimentSpec> experiments;
  std::optional<std::string> out_dir;

  // Accepts a single experiment object or {"experiments": [...]} with
  // top-level defaults for seed and trials.
  static ExperimentConfig FromJson(const nlohmann::json& j);
};

struct ExperimentOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out_dir;
};

struct ExperimentOutput {
  nlohmann::json summary = nlohmann::json::array();
  std::string csv;    // header plus one row per experiment
  std::string jsonl;  // one line per trial
};

inline constexpr std::string_view kCsvHeader = "scenario,m,n,i,strategy,trials,successes,rate,ci_low,ci_high";

// Throws fpdel::Error(kParse / kInvalidArgument) on bad configuration.
ExperimentOutput run_experiments(const ExperimentConfig& cfg, const ExperimentOverrides& overrides);

// ---- verify / delegate -------------------------------------------------

struct VerifyOptions {
  std::map<std::string, std::string> inputs;  // name -> "4" or "4,0.5" (SIMD)
  std::optional<std::string> malicious;
  fp::WordLayout layout{6, 6};
  std::optional<unsigned> counter_bits;
  std::size_t slot_count = 3;
  std::size_t fp_slot = 2;
  unsigned depth_budget = 4;
};

// Delegate, serve (honestly or with the named deviation) and verify in one
// process. exit 0 on acceptance, 1 otherwise.
CommandResult cmd_verify(const circuit::Circuit& c, const VerifyOptions& opts);

// Two-process form: the delegator writes a request and a secret context.
struct Delegation {
  nlohmann::json request;
  nlohmann::json context;
};
Delegation cmd_delegate(const circuit::Circuit& c, const VerifyOptions& opts);
nlohmann::json cmd_serve(const nlohmann::json& request);
CommandResult cmd_check(const nlohmann::json& context, const nlohmann::json& response);

// Full argument handling; output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fpdel::cli

#endif  // FPDEL_TOOLS_CLI_HPP_
