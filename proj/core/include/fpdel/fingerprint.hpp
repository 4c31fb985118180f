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

// Fingerprinted words: layout, the three fingerprint schemes, encoding,
// splitting and the delegator-side verdict.

#ifndef FPDEL_FINGERPRINT_HPP_
#define FPDEL_FINGERPRINT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpdel/he_backend.hpp"
#include "fpdel/plan.hpp"

namespace fpdel::fp {

// Fingerprint in bits [0, m), computation in bits [m, m + n).
struct WordLayout {
  unsigned n = 0;
  unsigned m = 0;

  static WordLayout Make(unsigned n, unsigned m);

  unsigned word_bits() const noexcept { return n + m; }
  std::uint64_t fp_limit() const noexcept { return std::uint64_t{1} << m; }
  std::uint64_t comp_limit() const noexcept { return std::uint64_t{1} << n; }
  std::uint64_t word_limit() const noexcept { return std::uint64_t{1} << (n + m); }

  std::uint64_t pack(std::uint64_t comp, std::uint64_t fp) const;
  std::uint64_t comp_of(std::uint64_t word) const noexcept { return (word >> m) & (comp_limit() - 1); }
  std::uint64_t fp_of(std::uint64_t word) const noexcept { return word & (fp_limit() - 1); }

  // Throws unless 1 <= n, 1 <= m and n + m <= modulus_bits.
  void validate(unsigned modulus_bits = 63) const;

  friend bool operator==(const WordLayout&, const WordLayout&) = default;
};

struct BinaryScheme {
  std::vector<unsigned> positions;
};
struct CompleteScheme {
  std::size_t num_inputs = 0;
};
struct IntegerScheme {
  std::vector<std::uint64_t> values;
};

class FingerprintScheme {
 public:
  using Variant = std::variant<BinaryScheme, CompleteScheme, IntegerScheme>;

  FingerprintScheme() = default;
  explicit FingerprintScheme(Variant v) : v_(std::move(v)) {}

  static FingerprintScheme Binary(std::vector<unsigned> positions);
  static FingerprintScheme Complete(std::size_t num_inputs);
  static FingerprintScheme Integer(std::vector<std::uint64_t> values);

  const Variant& variant() const noexcept { return v_; }
  std::string_view name() const noexcept;
  bool is_integer() const noexcept { return std::holds_alternative<IntegerScheme>(v_); }

  std::size_t size() const noexcept;
  // Fingerprint value of input j.
  std::uint64_t value(std::size_t j) const;
  std::vector<std::uint64_t> values() const;

  // Honest sum of every input taken once.
  std::uint64_t honest_sum() const;

  // Checks the invariants against an m-bit fingerprint field.
  void validate(unsigned m) const;

  nlohmann::json ToJson() const;
  static FingerprintScheme FromJson(const nlohmann::json& j);

 private:
  Variant v_ = CompleteScheme{};
};

struct EncodedWord {
  WordLayout layout;
  he::Ciphertext ct;
};

struct Split {
  std::uint64_t comp = 0;
  std::uint64_t fp = 0;
  friend bool operator==(const Split&, const Split&) = default;
};

EncodedWord encode_word(const he::KeyPair& kp, const WordLayout& layout, std::uint64_t comp_value,
                        std::uint64_t fp_value);

Split decode_split(const he::KeyPair& kp, const EncodedWord& w);

enum class Outcome : std::uint8_t { kAccepted, kRejected, kNullified };

std::string_view to_string(Outcome o) noexcept;

struct Verdict {
  Outcome outcome = Outcome::kRejected;
  std::optional<std::uint64_t> comp_value;  // set on acceptance
  std::uint64_t observed_fp = 0;
  std::uint64_t plaintext = 0;

  bool accepted() const noexcept { return outcome == Outcome::kAccepted; }
};

// Plaintext 0 is "nullified"; a matching fingerprint is "accepted";
// anything else is "rejected".
Verdict verify_result(const he::KeyPair& kp, const EncodedWord& w, std::uint64_t expected_fp);
Verdict classify(const WordLayout& layout, std::uint64_t plaintext, std::uint64_t expected_fp);

FingerprintScheme assign_complete_fingerprints(std::size_t i, unsigned m);

// Each k_j uniform in [2, floor((2^m - 1) / i)].
FingerprintScheme sample_integer_fingerprints(std::mt19937_64& rng, std::size_t i, unsigned m);

// The fingerprint an honest server must return. Scheme values fill the
// addition field, shifted above the plan's counter bits.
std::uint64_t expected_fingerprint(const FingerprintScheme& scheme,
                                   const logmult::ExecutionPlan& plan, unsigned m);

// Per-source fingerprint words for a plan (scheme values shifted above the
// counter field).
std::vector<std::uint64_t> source_fingerprints(const FingerprintScheme& scheme,
                                               const logmult::ExecutionPlan& plan, unsigned m);

}  // namespace fpdel::fp

#endif  // FPDEL_FINGERPRINT_HPP_
