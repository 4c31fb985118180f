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

#include "fpdel/blackbox_add.hpp"

#include <string>

#include "fpdel/blind_ops.hpp"
#include "fpdel/error.hpp"

namespace fpdel::bb {

std::string_view to_string(BlackboxMode mode) noexcept {
  switch (mode) {
    case BlackboxMode::kCarryNullify: return "carry_nullify";
    case BlackboxMode::kOverflowNullify: return "overflow_nullify";
    case BlackboxMode::kUnguarded: return "unguarded";
  }
  return "unknown";
}

BlackboxMode parse_blackbox_mode(std::string_view text) {
  for (auto m : {BlackboxMode::kCarryNullify, BlackboxMode::kOverflowNullify, BlackboxMode::kUnguarded}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorCode::kParse, "unknown blackbox mode '" + std::string(text) + "'");
}

BlackboxConfig BlackboxConfig::ForScheme(const fp::WordLayout& layout,
                                         const fp::FingerprintScheme& scheme, unsigned counter_bits) {
  if (std::holds_alternative<fp::CompleteScheme>(scheme.variant())) {
    return CompleteBinary(layout, counter_bits);
  }
  return {layout, BlackboxMode::kOverflowNullify, counter_bits};
}

void BlackboxConfig::validate() const {
  layout.validate();
  if (counter_bits >= layout.m) {
    throw Error(ErrorCode::kInvalidArgument, "counting field must leave room for addition fingerprints");
  }
}

namespace {

// Carry indices (c_j = carry out of bit j-1) that the mode forbids.
std::vector<unsigned> guarded_carries(const BlackboxConfig& cfg) {
  const unsigned m = cfg.layout.m;
  const unsigned w = cfg.layout.word_bits();
  std::vector<unsigned> out;
  switch (cfg.mode) {
    case BlackboxMode::kCarryNullify:
      for (unsigned j = cfg.counter_bits; j <= m; ++j) {
        if (j > 0) out.push_back(j);
      }
      break;
    case BlackboxMode::kOverflowNullify: out.push_back(m); break;
    case BlackboxMode::kUnguarded: return out;
  }
  if (out.back() != w) out.push_back(w);
  return out;
}

}  // namespace

AdditionBlackbox::AdditionBlackbox(BlackboxConfig cfg, he::Evaluator ev)
    : cfg_(cfg), ev_(std::move(ev)) {
  cfg_.validate();
}

void AdditionBlackbox::check(const EncodedWord& w) const {
  if (!(w.layout == cfg_.layout)) {
    throw Error(ErrorCode::kInvalidArgument, "word layout does not match the blackbox");
  }
  if (!w.ct.valid()) throw Error(ErrorCode::kInvalidArgument, "empty ciphertext");
}

std::vector<Ciphertext> AdditionBlackbox::carries(const Ciphertext& a, const Ciphertext& b) const {
  const unsigned w = cfg_.layout.word_bits();
  const he::TrustedAccess access;
  const auto abits = a.backend()->decompose_bits(a, w, access);
  const auto bbits = b.backend()->decompose_bits(b, w, access);
  std::vector<Ciphertext> c;
  c.reserve(w);
  // c_1 = a_0 b_0; c_{j+1} = a_j b_j + c_j (a_j xor b_j)
  c.push_back(ev_.mul(abits[0], bbits[0]));
  for (unsigned j = 1; j < w; ++j) {
    const Ciphertext ab = ev_.mul(abits[j], bbits[j]);
    const Ciphertext x = ev_.sub(ev_.add(abits[j], bbits[j]), ev_.mul_const(ab, 2));
    c.push_back(ev_.add(ab, ev_.mul(c.back(), x)));
  }
  return c;
}

Ciphertext AdditionBlackbox::violation_flag(const Ciphertext& a, const Ciphertext& b) const {
  const auto idx = guarded_carries(cfg_);
  if (idx.empty()) return blind::extract_zero(ev_, a);
  const auto c = carries(a, b);
  std::vector<Ciphertext> picked;
  picked.reserve(idx.size());
  for (unsigned j : idx) picked.push_back(c[j - 1]);
  return blind::extract_one(ev_, picked);
}

AdditionBlackbox::RawSum AdditionBlackbox::add_raw(const Ciphertext& a, const Ciphertext& b) const {
  return {ev_.add(a, b), violation_flag(a, b)};
}

Ciphertext AdditionBlackbox::nullify_if(const Ciphertext& value, const Ciphertext& flag) const {
  // value * (1 - flag) without needing an encrypted 1
  return ev_.sub(value, ev_.mul(value, flag));
}

EncodedWord AdditionBlackbox::add(const EncodedWord& a, const EncodedWord& b) const {
  check(a);
  check(b);
  if (cfg_.mode == BlackboxMode::kUnguarded) return {cfg_.layout, ev_.add(a.ct, b.ct)};
  const RawSum r = add_raw(a.ct, b.ct);
  return {cfg_.layout, nullify_if(r.sum, r.violation)};
}

EncodedWord AdditionBlackbox::add_chain(std::span<const EncodedWord> words) const {
  if (words.empty()) throw Error(ErrorCode::kInvalidArgument, "add_chain needs at least one word");
  for (const auto& w : words) check(w);
  Ciphertext acc = words[0].ct;
  if (cfg_.mode == BlackboxMode::kUnguarded) {
    for (std::size_t i = 1; i < words.size(); ++i) acc = ev_.add(acc, words[i].ct);
    return {cfg_.layout, acc};
  }
  if (words.size() == 1) return words[0];
  Ciphertext dead;
  for (std::size_t i = 1; i < words.size(); ++i) {
    RawSum r = add_raw(acc, words[i].ct);
    dead = dead.valid() ? blind::blind_or(ev_, dead, r.violation) : r.violation;
    acc = r.sum;
  }
  return {cfg_.layout, nullify_if(acc, dead)};
}

EncodedWord AdditionBlackbox::scale(const EncodedWord& a, std::uint64_t k) const {
  check(a);
  if (k == 0) return {cfg_.layout, blind::extract_zero(ev_, a.ct)};
  const bool guarded = cfg_.mode != BlackboxMode::kUnguarded;
  Ciphertext pow = a.ct;
  Ciphertext acc;
  Ciphertext dead;
  auto absorb = [&](const Ciphertext& x, const Ciphertext& y) {
    if (!guarded) return ev_.add(x, y);
    RawSum r = add_raw(x, y);
    dead = dead.valid() ? blind::blind_or(ev_, dead, r.violation) : r.violation;
    return r.sum;
  };
  for (std::uint64_t rest = k;;) {
    if (rest & 1U) acc = acc.valid() ? absorb(acc, pow) : pow;
    rest >>= 1;
    if (rest == 0) break;
    pow = absorb(pow, pow);
  }
  if (dead.valid()) acc = nullify_if(acc, dead);
  return {cfg_.layout, acc};
}

EncodedWord bb_add(const BlackboxConfig& cfg, const EncodedWord& a, const EncodedWord& b) {
  return AdditionBlackbox(cfg).add(a, b);
}

EncodedWord bb_add_chain(const BlackboxConfig& cfg, std::span<const EncodedWord> words) {
  return AdditionBlackbox(cfg).add_chain(words);
}

EncodedWord field_reduce(const he::Evaluator& ev, const EncodedWord& w,
                         const EncodedWord& enc_modulus, const Ciphertext& overflow_bit,
                         const Ciphertext& one) {
  if (!(w.layout == enc_modulus.layout)) {
    throw Error(ErrorCode::kInvalidArgument, "field modulus layout differs from the word");
  }
  const Ciphertext reduced = ev.sub(w.ct, enc_modulus.ct);
  return {w.layout, blind::blind_if(ev, overflow_bit, reduced, w.ct, one)};
}

bool reference_violation(const BlackboxConfig& cfg, std::uint64_t a, std::uint64_t b) {
  const unsigned w = cfg.layout.word_bits();
  std::uint64_t carry = 0;
  std::vector<std::uint64_t> c(w + 1, 0);
  for (unsigned j = 0; j < w; ++j) {
    const std::uint64_t s = ((a >> j) & 1U) + ((b >> j) & 1U) + carry;
    carry = s >> 1;
    c[j + 1] = carry;
  }
  for (unsigned j : guarded_carries(cfg)) {
    if (c[j] != 0) return true;
  }
  return false;
}

std::uint64_t reference_add(const BlackboxConfig& cfg, std::uint64_t a, std::uint64_t b) {
  if (reference_violation(cfg, a, b)) return 0;
  const unsigned w = cfg.layout.word_bits();
  return (a + b) & ((std::uint64_t{1} << w) - 1);
}

}  // namespace fpdel::bb
