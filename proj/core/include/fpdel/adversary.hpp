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

// Attack strategies against each scenario, run through the same server
// APIs an honest server uses, plus the Monte Carlo harness.

#ifndef FPDEL_ADVERSARY_HPP_
#define FPDEL_ADVERSARY_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpdel/blind_ops.hpp"
#include "fpdel/fingerprint.hpp"
#include "fpdel/he_backend.hpp"
#include "fpdel/plan.hpp"
#include "fpdel/protocol.hpp"
#include "fpdel/simd_fp.hpp"
#include "fpdel/stats.hpp"

namespace fpdel::adversary {

enum class TrialOutcome : std::uint8_t { kAcceptedWrong, kRejected, kNullified, kAcceptedCorrect };

std::string_view to_string(TrialOutcome o) noexcept;

// Only an accepted answer with a wrong computation value counts as an
// attack success.
TrialOutcome classify(const fp::Verdict& v, std::uint64_t honest_comp);
TrialOutcome classify(const protocol::VerifiedResult& r, std::uint64_t honest_comp);

struct TrialReport {
  std::string strategy;
  nlohmann::json scenario = nlohmann::json::object();
  TrialOutcome outcome = TrialOutcome::kRejected;
  std::vector<std::string> transcript;
  nlohmann::json detail = nlohmann::json::object();

  bool success() const noexcept { return outcome == TrialOutcome::kAcceptedWrong; }
  // Rejected or nullified.
  bool detected() const noexcept {
    return outcome == TrialOutcome::kRejected || outcome == TrialOutcome::kNullified;
  }
  nlohmann::json ToJson() const;
};

// ---- bit granularity: consistent cleartext LUT ------------------------

struct LutRun {
  std::uint64_t input = 0;
  std::size_t key = 0;
  std::uint64_t output = 0;     // decrypted server answer
  std::uint64_t lut_value = 0;  // what the adversary wanted
  std::size_t gates = 0;
};

struct ConsistencyReport {
  std::vector<LutRun> runs;
  std::vector<std::string> transcript;  // gates of one run

  // Every run decrypted to the adversary's table.
  bool consistent() const;
  nlohmann::json ToJson() const;
};

// For every key and every input pattern, the server receives encrypted
// input bits and evaluates `lut` blindly.
ConsistencyReport attack_consistent_lut(const blind::ClearLut& lut, std::span<const he::KeyPair> keys);

// ---- omit one addend, mask it with doublings of another ---------------

struct MaskingScenario {
  fp::WordLayout layout{16, 8};
  std::size_t inputs = 4;
  std::uint64_t comp_limit = 256;

  nlohmann::json ToJson() const;
};

// Binary scheme at fresh random positions, overflow-only blackbox. The
// adversary picks an ordered pair, a direction and a distance d in [1, m-1],
// drops one member of the pair and adds 2^d extra copies of the other.
TrialReport attack_omit_and_mask(const MaskingScenario& s, std::mt19937_64& rng);

struct Enumeration {
  std::uint64_t cases = 0;
  std::uint64_t successes = 0;
  double rate() const { return cases ? static_cast<double>(successes) / static_cast<double>(cases) : 0.0; }
};

// Every ordered position pair against every (direction, d) guess, evaluated
// through the blackbox reference.
Enumeration enumerate_masking_guesses(unsigned m);

// ---- overflow the fingerprint by repetition ---------------------------

struct OverflowScenario {
  fp::WordLayout layout{12, 4};
  bool defended = true;

  nlohmann::json ToJson() const;
};

// Two Complete-scheme inputs X, Y; the server sums X `reps` times plus Y.
TrialReport attack_overflow_clear(const OverflowScenario& s, std::uint64_t reps, std::mt19937_64& rng);

// ---- blind subset sum --------------------------------------------------

struct SubsetScenario {
  fp::WordLayout layout{8, 8};
  std::size_t inputs = 4;
  unsigned bound = 4;  // copies per addend
  std::uint64_t comp_limit = 8;

  nlohmann::json ToJson() const;
};

// Integer scheme; the adversary adds a random multiset (at most `bound`
// copies of each input) other than "each input once". If `counts` is given
// it is used instead of a random draw.
TrialReport attack_blind_subset(const SubsetScenario& s, std::mt19937_64& rng,
                                std::optional<std::vector<unsigned>> counts = std::nullopt);

// ---- plan deviations ---------------------------------------------------

// The plan with every use of source `index` dropped.
logmult::ExecutionPlan omit_source(const logmult::ExecutionPlan& plan, std::size_t index);
// The plan with source `index` added a second time right after its first use.
logmult::ExecutionPlan duplicate_source(const logmult::ExecutionPlan& plan, std::size_t index);
// Indices of the plan's exponentiation steps.
std::vector<std::size_t> exp_steps(const logmult::ExecutionPlan& plan);

// Runs `executed` on the request's inputs and verifies with the context.
TrialReport run_modified_plan(const protocol::PreparedRequest& prepared, const logmult::ExecutionPlan& executed,
                              std::uint64_t honest_comp, std::string strategy);

// The plan minus exponentiation step `exp_index` (defaults to the last).
TrialReport attack_skip_exp(const protocol::PreparedRequest& prepared, std::uint64_t honest_comp,
                            std::optional<std::size_t> exp_index = std::nullopt);

// ---- SIMD: execute a different program ---------------------------------

// Extra multiplications, swapped operation kinds and rewired operands.
std::vector<simd::SimdProgram> simd_variants(const simd::SimdProgram& p);

// Executes `executed`; with forge_trace the server reports the honest
// program's trace instead of its own.
TrialReport attack_reorder_simd(const protocol::PreparedRequest& prepared, const simd::SimdProgram& executed,
                                bool forge_trace, std::span<const double> honest_comp);

// ---- harness -----------------------------------------------------------

using TrialFn = std::function<TrialReport(std::mt19937_64&, std::uint64_t trial)>;

// Trial t runs with stats::trial_rng(seed, t). Throws on zero trials.
stats::DetectionStats monte_carlo(const TrialFn& fn, std::uint64_t trials, std::uint64_t seed,
                                  std::vector<TrialReport>* reports = nullptr);

}  // namespace fpdel::adversary

#endif  // FPDEL_ADVERSARY_HPP_
