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

// Server-side execution plans for word-granularity delegation.

#ifndef FPDEL_PLAN_HPP_
#define FPDEL_PLAN_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fpdel::logmult {

// Value-domain words carry the number itself; log-domain words carry log2.
enum class Domain : std::uint8_t { kValue, kLog };

enum class SourceKind : std::uint8_t { kInput, kConst };

// One addend supplied by the delegator. Every leaf occurrence of the circuit
// is its own source and carries its own fingerprint.
struct Source {
  SourceKind kind = SourceKind::kInput;
  std::string name;          // input name, or a label for constants
  std::uint64_t value = 0;   // constants: value in `domain`
  Domain domain = Domain::kValue;
  std::optional<std::uint64_t> fp_hint;  // annotation carried from the circuit
};

struct Ref {
  enum class Kind : std::uint8_t { kSource, kStep };
  Kind kind = Kind::kSource;
  std::size_t index = 0;

  static Ref Src(std::size_t i) { return {Kind::kSource, i}; }
  static Ref Step(std::size_t i) { return {Kind::kStep, i}; }
  friend bool operator==(const Ref&, const Ref&) = default;
};

enum class StepKind : std::uint8_t { kAdd, kAddConst, kExp, kLog, kScale };

std::string_view to_string(StepKind kind) noexcept;

struct Step {
  StepKind kind = StepKind::kAdd;
  Ref lhs;
  Ref rhs;                  // kAdd / kAddConst only
  std::uint64_t scalar = 0; // kScale only

  friend bool operator==(const Step&, const Step&) = default;
};

enum class PlanMode : std::uint8_t { kWord, kLogMult };

std::string_view to_string(PlanMode mode) noexcept;

struct ExecutionPlan {
  PlanMode mode = PlanMode::kWord;
  std::vector<Source> sources;
  std::vector<Step> steps;
  // Width of the multiplication-counting field at the bottom of the
  // fingerprint section (0 in word mode).
  unsigned counter_bits = 0;

  Ref output() const {
    return steps.empty() ? Ref::Src(0) : Ref::Step(steps.size() - 1);
  }
  std::size_t count(StepKind kind) const;
  std::size_t lut_steps() const { return count(StepKind::kExp) + count(StepKind::kLog); }

  // A copy with step `index` removed; later references to it are redirected
  // to its operand.
  ExecutionPlan without_step(std::size_t index) const;

  void validate() const;

  nlohmann::json ToJson() const;
  static ExecutionPlan FromJson(const nlohmann::json& j);
};

// Fingerprint after every step for the given per-source fingerprint words
// (already shifted above the counter field). Additions add, scaling
// multiplies, and every LUT hop adds one to the counter. Throws
// kOutOfRange if an honest intermediate leaves the m-bit section.
std::vector<std::uint64_t> fingerprint_trace(const ExecutionPlan& plan,
                                             std::span<const std::uint64_t> source_fp,
                                             unsigned m);

}  // namespace fpdel::logmult

#endif  // FPDEL_PLAN_HPP_
