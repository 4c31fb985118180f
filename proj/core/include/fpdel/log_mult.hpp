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

// Multiplication through discrete logs: log encoding, the delegator-built
// exponentiation and log lookup tables, and the circuit compiler that turns
// a polynomial into a server execution plan.

#ifndef FPDEL_LOG_MULT_HPP_
#define FPDEL_LOG_MULT_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpdel/blackbox_add.hpp"
#include "fpdel/circuit.hpp"
#include "fpdel/fingerprint.hpp"
#include "fpdel/he_backend.hpp"
#include "fpdel/plan.hpp"

namespace fpdel::logmult {

using fp::EncodedWord;
using fp::WordLayout;

// FP_m (the LUT-use counter) takes the low m_c bits of the fingerprint
// section, FP_a the m_a bits above it.
struct FpSplit {
  unsigned m_a = 0;
  unsigned m_c = 0;

  static FpSplit Make(const WordLayout& layout, unsigned m_c);
  void validate(const WordLayout& layout) const;

  std::uint64_t counter_mask() const noexcept { return (std::uint64_t{1} << m_c) - 1; }

  friend bool operator==(const FpSplit&, const FpSplit&) = default;
};

// log2 of a positive power of two.
std::uint64_t to_log_encoding(std::uint64_t value);

enum class LutDirection : std::uint8_t { kExp, kLog };

std::string_view to_string(LutDirection d) noexcept;

struct LutRow {
  std::uint64_t key = 0;  // full input word
  std::uint64_t out = 0;  // full output word
};

// Delegator-side cleartext table.
struct LutTable {
  LutDirection direction = LutDirection::kExp;
  WordLayout layout;
  FpSplit split;
  std::vector<LutRow> rows;

  // Every legal computation value crossed with every fingerprint whose
  // counter can still be incremented.
  static LutTable Open(LutDirection d, const WordLayout& layout, const FpSplit& split);
  // Every legal computation value crossed with only the given fingerprints.
  static LutTable Pinned(LutDirection d, const WordLayout& layout, const FpSplit& split,
                         std::span<const std::uint64_t> fingerprints);

  // Cleartext lookup; 0 when no row matches.
  std::uint64_t lookup(std::uint64_t word) const noexcept;
};

// Server-held encrypted table. Rows are (encrypted key bits, encrypted
// output word); an input selects a row through a product of XNORs, so
// neither keys nor outputs are visible to the holder.
class LutDevice {
 public:
  struct EncRow {
    std::vector<he::Ciphertext> key_bits;  // LSB first
    he::Ciphertext out;
  };

  LutDevice(LutDirection direction, WordLayout layout, std::vector<EncRow> rows,
            he::Ciphertext one, he::Evaluator ev = {});

  static LutDevice Build(const he::KeyPair& kp, const LutTable& table);

  LutDirection direction() const noexcept { return direction_; }
  const WordLayout& layout() const noexcept { return layout_; }
  std::size_t size() const noexcept { return rows_.size(); }

  // The row output for w, or an encryption of 0 if no row matches.
  EncodedWord apply(const EncodedWord& w) const;

  // Re-binds the evaluator (for transcript observers).
  LutDevice with_evaluator(he::Evaluator ev) const;

  nlohmann::json ToJson() const;
  static LutDevice FromJson(const nlohmann::json& j);

 private:
  LutDirection direction_;
  WordLayout layout_;
  std::vector<EncRow> rows_;
  he::Ciphertext one_;
  he::Evaluator ev_;
};

struct LutPair {
  LutDevice exp;
  LutDevice log;
};

// Tables over all reachable fingerprints.
LutPair build_luts(const he::KeyPair& kp, const WordLayout& layout, const FpSplit& split);

// Tables restricted to the fingerprints an honest run of `plan` presents to
// each LUT.
LutPair build_luts(const he::KeyPair& kp, const WordLayout& layout, const FpSplit& split,
                   const ExecutionPlan& plan, std::span<const std::uint64_t> source_fp);

// Input fingerprints seen by the plan's LUT steps of one direction.
std::vector<std::uint64_t> lut_fingerprints(const ExecutionPlan& plan,
                                            std::span<const std::uint64_t> source_fp, unsigned m,
                                            LutDirection direction);

EncodedWord apply_lut(const LutDevice& lut, const EncodedWord& w);

enum class CompileMode : std::uint8_t {
  kAuto,     // log domain only when two non-constant operands are multiplied
  kWord,     // additions and clear-constant scaling
  kLogMult,  // every multiplication through the log domain
};

// Turns a polynomial circuit into an execution plan. Each leaf occurrence
// becomes its own source; operands that need steps are compiled before leaf
// operands, and leaves are registered at the step that consumes them.
ExecutionPlan compile_circuit(const circuit::Circuit& c, CompileMode mode, unsigned counter_bits);

struct CompiledPlan {
  ExecutionPlan plan;
  std::vector<std::uint64_t> source_fp;
  std::vector<std::uint64_t> trace;
  std::uint64_t expected_fp = 0;
};

// Compiles and computes the honest fingerprint trace. Throws kOutOfRange if
// the honest run would overflow the fingerprint or counter fields.
CompiledPlan compile_circuit(const circuit::Circuit& c, const fp::FingerprintScheme& scheme,
                             const WordLayout& layout, const FpSplit& split,
                             CompileMode mode = CompileMode::kAuto);

// Scheme built from the fp annotations carried by the plan's sources;
// integer if every source is annotated, complete otherwise.
fp::FingerprintScheme scheme_from_annotations(const ExecutionPlan& plan);

// True if the plan multiplies a word by a clear constant >= 2. Carry
// nullification would zero such a step, so only integer schemes fit.
bool plan_scales(const ExecutionPlan& plan);

// Computation value (in its domain) of every source for the given inputs.
std::vector<std::uint64_t> source_values(const ExecutionPlan& plan,
                                         const std::map<std::string, std::uint64_t>& inputs);

// Plaintext reference run of the plan on computation values only.
std::uint64_t evaluate_plan(const ExecutionPlan& plan, std::span<const std::uint64_t> source_comp);

}  // namespace fpdel::logmult

#endif  // FPDEL_LOG_MULT_HPP_
