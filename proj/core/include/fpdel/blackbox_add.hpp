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

// The trusted addition blackbox: encrypted word addition that replaces the
// result with an encryption of 0 when the addition carries where the
// fingerprint rules forbid it.

#ifndef FPDEL_BLACKBOX_ADD_HPP_
#define FPDEL_BLACKBOX_ADD_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fpdel/fingerprint.hpp"
#include "fpdel/he_backend.hpp"

namespace fpdel::bb {

using fp::EncodedWord;
using he::Ciphertext;

enum class BlackboxMode : std::uint8_t {
  // Any carry out of a fingerprint bit nullifies, except carries that stay
  // inside the low `counter_bits` counting field.
  kCarryNullify,
  // Only a carry out of the fingerprint section into the computation part
  // nullifies.
  kOverflowNullify,
  // Plain addition. The deliberately weakened variant used to show what the
  // checks prevent.
  kUnguarded,
};

std::string_view to_string(BlackboxMode mode) noexcept;
BlackboxMode parse_blackbox_mode(std::string_view text);

// Both guarded modes also nullify on a carry out of the top word bit.
struct BlackboxConfig {
  fp::WordLayout layout;
  BlackboxMode mode = BlackboxMode::kCarryNullify;
  unsigned counter_bits = 0;

  static BlackboxConfig CompleteBinary(const fp::WordLayout& layout, unsigned counter_bits = 0) {
    return {layout, BlackboxMode::kCarryNullify, counter_bits};
  }
  static BlackboxConfig IntegerFp(const fp::WordLayout& layout) {
    return {layout, BlackboxMode::kOverflowNullify, 0};
  }
  static BlackboxConfig Unguarded(const fp::WordLayout& layout) {
    return {layout, BlackboxMode::kUnguarded, 0};
  }
  // Complete schemes get carry nullification, everything else overflow-only.
  static BlackboxConfig ForScheme(const fp::WordLayout& layout, const fp::FingerprintScheme& scheme,
                                  unsigned counter_bits = 0);

  void validate() const;

  friend bool operator==(const BlackboxConfig&, const BlackboxConfig&) = default;
};

class AdditionBlackbox {
 public:
  explicit AdditionBlackbox(BlackboxConfig cfg, he::Evaluator ev = {});

  const BlackboxConfig& config() const noexcept { return cfg_; }

  EncodedWord add(const EncodedWord& a, const EncodedWord& b) const;

  // Left fold of add; once a step violates the rules the result stays 0.
  EncodedWord add_chain(std::span<const EncodedWord> words) const;

  // k * a by doubling and adding, with the same absorbing rule as add_chain.
  EncodedWord scale(const EncodedWord& a, std::uint64_t k) const;

  // Encrypted carries c_1 .. c_W of a + b, where c_{j+1} leaves bit j.
  std::vector<Ciphertext> carries(const Ciphertext& a, const Ciphertext& b) const;

  // Encrypted 1 iff a + b breaks the configured carry rules, else 0.
  // Unguarded mode always yields 0.
  Ciphertext violation_flag(const Ciphertext& a, const Ciphertext& b) const;

 private:
  struct RawSum {
    Ciphertext sum;
    Ciphertext violation;
  };
  RawSum add_raw(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext nullify_if(const Ciphertext& value, const Ciphertext& flag) const;
  void check(const EncodedWord& w) const;

  BlackboxConfig cfg_;
  he::Evaluator ev_;
};

EncodedWord bb_add(const BlackboxConfig& cfg, const EncodedWord& a, const EncodedWord& b);
EncodedWord bb_add_chain(const BlackboxConfig& cfg, std::span<const EncodedWord> words);

// blind_if(overflow_bit, w - enc_modulus, w).
EncodedWord field_reduce(const he::Evaluator& ev, const EncodedWord& w,
                         const EncodedWord& enc_modulus, const Ciphertext& overflow_bit,
                         const Ciphertext& one);

// Plaintext reference: the value the blackbox returns for a + b.
std::uint64_t reference_add(const BlackboxConfig& cfg, std::uint64_t a, std::uint64_t b);
// Plaintext reference for the violation predicate.
bool reference_violation(const BlackboxConfig& cfg, std::uint64_t a, std::uint64_t b);

}  // namespace fpdel::bb

#endif  // FPDEL_BLACKBOX_ADD_HPP_
