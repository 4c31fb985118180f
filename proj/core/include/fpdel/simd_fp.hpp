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

// Fingerprints in SIMD vectors: one hidden slot carries an integer
// fingerprint, the other slots carry (possibly real) computation values, and
// every slot goes through the same program.

#ifndef FPDEL_SIMD_FP_HPP_
#define FPDEL_SIMD_FP_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpdel/circuit.hpp"
#include "fpdel/fingerprint.hpp"
#include "fpdel/he_backend.hpp"

namespace fpdel::simd {

struct SimdLayout {
  std::size_t slot_count = 0;
  std::size_t fp_slot = 0;

  std::size_t comp_slots() const noexcept { return slot_count - 1; }
  void validate() const;

  friend bool operator==(const SimdLayout&, const SimdLayout&) = default;
};

struct SimdVector {
  SimdLayout layout;
  he::Ciphertext ct;
};

enum class OpKind : std::uint8_t { kAdd, kMul, kAddConst, kMulConst, kSub, kDiv };

std::string_view to_string(OpKind op) noexcept;

struct Operand {
  enum class Kind : std::uint8_t { kInput, kConst, kStep };
  Kind kind = Kind::kInput;
  std::size_t index = 0;

  static Operand Input(std::size_t i) { return {Kind::kInput, i}; }
  static Operand Const(std::size_t i) { return {Kind::kConst, i}; }
  static Operand Step(std::size_t i) { return {Kind::kStep, i}; }
  friend bool operator==(const Operand&, const Operand&) = default;
};

// *Const ops take an encrypted constant vector as rhs.
struct SimdStep {
  OpKind op = OpKind::kAdd;
  Operand lhs;
  Operand rhs;
  friend bool operator==(const SimdStep&, const SimdStep&) = default;
};

// One step list for every slot. Constants are referenced by index; their
// values travel encrypted next to the inputs.
struct SimdProgram {
  std::size_t num_inputs = 0;
  std::size_t num_consts = 0;
  std::vector<SimdStep> steps;

  Operand output() const {
    return steps.empty() ? Operand::Input(0) : Operand::Step(steps.size() - 1);
  }
  // Multiplicative depth (levels consumed along the deepest path).
  unsigned depth_cost() const;
  void validate() const;

  nlohmann::json ToJson() const;
  static SimdProgram FromJson(const nlohmann::json& j);

  friend bool operator==(const SimdProgram&, const SimdProgram&) = default;
};

// Delegator-side constant: real comp value plus an integer stand-in for the
// fingerprint slot.
struct SimdConst {
  double comp = 0.0;
  double fp = 2.0;
};

struct CompiledSimd {
  SimdProgram program;
  std::vector<std::string> input_names;
  std::vector<SimdConst> consts;
};

// Constants without an fp annotation get the smallest unused integer
// stand-in >= 2.
CompiledSimd compile_simd(const circuit::Circuit& c);

struct LintFinding {
  enum class Code : std::uint8_t { kSubtraction, kDivision, kConstNegative, kConstFractional,
                                   kConstIdentity, kConstDuplicate, kDepth };
  Code code;
  std::size_t index;  // step or constant index; budget for kDepth
  std::string message;
};

std::string_view to_string(LintFinding::Code code) noexcept;

// Empty on success.
std::vector<LintFinding> lint_program(const SimdProgram& p, std::span<const double> fp_consts,
                                      unsigned depth_budget);

SimdVector encode_simd(const he::KeyPair& kp, std::span<const double> comp_values, double fp_value,
                       std::size_t fp_slot);
SimdVector encode_const(const he::KeyPair& kp, const SimdLayout& layout, const SimdConst& c);

// What the server actually did, in executed order.
struct TraceCircuit {
  std::vector<SimdStep> steps;

  SimdProgram to_program(std::size_t num_inputs, std::size_t num_consts) const {
    return {num_inputs, num_consts, steps};
  }
  // The trace as an arithmetic circuit over inputs i<k> and constants c<k>.
  circuit::Circuit to_circuit(std::size_t num_inputs, std::size_t num_consts) const;
  bool matches(const SimdProgram& p) const { return steps == p.steps; }

  nlohmann::json ToJson() const;
  static TraceCircuit FromJson(const nlohmann::json& j);
};

struct ExecuteOptions {
  // Run programs the linter would refuse (for the float-hazard demo).
  bool skip_lint = false;
};

struct Execution {
  SimdVector result;
  TraceCircuit trace;
};

Execution simd_execute(const SimdProgram& p, std::span<const SimdVector> inputs,
                       std::span<const SimdVector> consts, const he::Evaluator& ev = {},
                       ExecuteOptions options = {});

// Plaintext reference run of the program on one slot.
double evaluate_slot(const SimdProgram& p, std::span<const double> inputs, std::span<const double> consts);

// Fingerprint the honest server must leave in the fp slot.
double expected_simd_fp(const SimdProgram& p, std::span<const double> input_fps,
                        std::span<const SimdConst> consts);

struct SimdVerdict {
  fp::Outcome outcome = fp::Outcome::kRejected;
  std::vector<double> comp;  // set on acceptance
  double observed_fp = 0.0;
  bool trace_ok = true;
  std::string reason;

  bool accepted() const noexcept { return outcome == fp::Outcome::kAccepted; }
};

inline constexpr double kFpResidual = 1e-6;

// Accepts iff the fp slot rounds (within kFpResidual) to expected_fp and, when
// both are supplied, the trace reproduces the program.
SimdVerdict verify_simd(const he::KeyPair& kp, const SimdVector& result, double expected_fp,
                        const TraceCircuit* trace = nullptr, const SimdProgram* plan = nullptr);

// Computation slots of a vector, in slot order with the fp slot skipped.
std::vector<double> comp_slots(const SimdLayout& layout, std::span<const double> slots);

}  // namespace fpdel::simd

#endif  // FPDEL_SIMD_FP_HPP_
