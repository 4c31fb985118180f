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

// Blind primitives over ciphertexts: conditioning, OR/NOT, recovering an
// encrypted 1 from data, and evaluating a cleartext lookup table on
// encrypted input bits. Everything here is built from evaluation gates only.

#ifndef FPDEL_BLIND_OPS_HPP_
#define FPDEL_BLIND_OPS_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fpdel/he_backend.hpp"

namespace fpdel::blind {

using he::Ciphertext;
using he::Evaluator;

// A table over all 2^input_bits patterns; rows[p] is the output bit-vector
// (bit j of the integer is output bit j).
struct ClearLut {
  unsigned input_bits = 0;
  unsigned output_bits = 1;
  std::vector<std::uint64_t> rows;

  static ClearLut FromFunction(unsigned input_bits, unsigned output_bits,
                               const std::function<std::uint64_t(std::uint64_t)>& f);
  // Outputs 0,1,0,1,... by input parity.
  static ClearLut AlternatingParity(unsigned input_bits);
  static ClearLut Identity(unsigned bits);

  std::uint64_t lookup(std::uint64_t pattern) const;
  void validate() const;
};

Ciphertext blind_or(const Evaluator& ev, const Ciphertext& x, const Ciphertext& y);
Ciphertext blind_not(const Evaluator& ev, const Ciphertext& x, const Ciphertext& one);

// bit * f + (1 - bit) * g
Ciphertext blind_if(const Evaluator& ev, const Ciphertext& bit, const Ciphertext& f,
                    const Ciphertext& g, const Ciphertext& one);

// OR of all bits: an encryption of 1 unless every bit is 0.
Ciphertext extract_one(const Evaluator& ev, std::span<const Ciphertext> bits);

// x - x.
Ciphertext extract_zero(const Evaluator& ev, const Ciphertext& any);

// 1 iff x == y for Boolean x, y.
Ciphertext blind_xnor(const Evaluator& ev, const Ciphertext& x, const Ciphertext& y,
                      const Ciphertext& one);

// Product of XNORs: 1 iff the two bit vectors are equal.
Ciphertext blind_equal(const Evaluator& ev, std::span<const Ciphertext> a,
                       std::span<const Ciphertext> b, const Ciphertext& one);

// Evaluates `lut` on encrypted input bits (LSB first). Each output bit is the
// sum over rows of (product of matching or negated input bits) * row output.
// Products are folded from the most significant bit. For an all-zero input
// no encrypted 1 exists and every output decrypts to 0.
std::vector<Ciphertext> blind_lut_eval(const Evaluator& ev,
                                       std::span<const Ciphertext> input_bits,
                                       const ClearLut& lut);

}  // namespace fpdel::blind

#endif  // FPDEL_BLIND_OPS_HPP_
