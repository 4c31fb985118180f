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

#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fpdel/blackbox_add.hpp"
#include "fpdel/error.hpp"
#include "fpdel/fingerprint.hpp"

namespace fpdel::bb {
namespace {

using fp::encode_word;
using fp::WordLayout;

he::KeyPair word_key(const WordLayout& l) { return he::keygen(he::SlotKind::Word(l.word_bits())); }

TEST(BbAdd, BinaryWorkedExample) {
  const auto l = WordLayout::Make(3, 4);
  const auto kp = word_key(l);
  for (const auto cfg : {BlackboxConfig::CompleteBinary(l), BlackboxConfig::IntegerFp(l)}) {
    const auto r = bb_add(cfg, {l, kp.encrypt(0b0010010)}, {l, kp.encrypt(0b1100100)});
    EXPECT_EQ(kp.decrypt(r.ct), 0b1110110U);
  }
}

TEST(BbAdd, CollidingFingerprintBitsNullify) {
  const auto l = WordLayout::Make(2, 2);
  const auto kp = word_key(l);
  const auto cfg = BlackboxConfig::CompleteBinary(l);
  EXPECT_EQ(kp.decrypt(bb_add(cfg, encode_word(kp, l, 1, 0b01), encode_word(kp, l, 1, 0b01)).ct), 0U);
  // Brute force over every fp pair against the plaintext adder.
  for (std::uint64_t a = 0; a < 4; ++a) {
    for (std::uint64_t b = 0; b < 4; ++b) {
      const auto r = bb_add(cfg, encode_word(kp, l, 1, a), encode_word(kp, l, 0, b));
      const bool carry = (a & b) != 0;
      EXPECT_EQ(kp.decrypt(r.ct), carry ? 0 : l.pack(1, a + b)) << a << "+" << b;
    }
  }
}

TEST(BbAdd, ZeroWordIsIdentity) {
  const auto l = WordLayout::Make(4, 4);
  const auto kp = word_key(l);
  const auto cfg = BlackboxConfig::CompleteBinary(l);
  for (std::uint64_t v = 1; v < l.word_limit(); v += 13) {
    EXPECT_EQ(kp.decrypt(bb_add(cfg, {l, kp.encrypt(v)}, encode_word(kp, l, 0, 0)).ct), v);
  }
}

TEST(BbAdd, RejectsForeignLayouts) {
  const auto l = WordLayout::Make(4, 4);
  const auto kp = word_key(l);
  const auto w = encode_word(kp, l, 1, 1);
  const fp::EncodedWord other{WordLayout::Make(3, 5), w.ct};
  EXPECT_THROW(bb_add(BlackboxConfig::CompleteBinary(l), w, other), Error);
}

TEST(Chain, CompleteHonestAndDuplicate) {
  const auto l = WordLayout::Make(4, 4);
  const auto kp = word_key(l);
  const auto cfg = BlackboxConfig::CompleteBinary(l);
  const std::vector<fp::EncodedWord> words{encode_word(kp, l, 1, 1), encode_word(kp, l, 2, 2),
                                           encode_word(kp, l, 3, 4)};
  EXPECT_EQ(fp::decode_split(kp, bb_add_chain(cfg, words)), (fp::Split{6, 0b111}));
  const std::vector<fp::EncodedWord> dup{words[0], words[1], words[0]};
  EXPECT_EQ(kp.decrypt(bb_add_chain(cfg, dup).ct), 0U);
}

TEST(Chain, IntegerChainsMatchPlaintext) {
  const auto l = WordLayout::Make(10, 10);
  const auto kp = word_key(l);
  const auto cfg = BlackboxConfig::IntegerFp(l);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t i = 1 + rng() % 4;
    auto scheme = fp::sample_integer_fingerprints(rng, i, l.m);
    std::vector<fp::EncodedWord> words;
    std::uint64_t comp = 0;
    for (std::size_t j = 0; j < i; ++j) {
      const std::uint64_t c = rng() % 200;
      comp += c;
      words.push_back(encode_word(kp, l, c, scheme.value(j)));
    }
    ASSERT_EQ(fp::decode_split(kp, bb_add_chain(cfg, words)), (fp::Split{comp, scheme.honest_sum()}));
  }
  for (int t = 0; t < 10000; ++t) {
    const std::uint64_t a = rng() % l.word_limit();
    const std::uint64_t b = rng() % l.word_limit();
    const std::uint64_t sum = a + b;
    const bool overflow = ((a & 1023) + (b & 1023)) >> 10 || sum >= l.word_limit();
    ASSERT_EQ(reference_add(cfg, a, b), overflow ? 0 : sum);
  }
}

TEST(Chain, AbsorbsAfterNullification) {
  const auto l = WordLayout::Make(4, 4);
  const auto kp = word_key(l);
  const auto cfg = BlackboxConfig::CompleteBinary(l);
  const auto x = encode_word(kp, l, 1, 1);
  const auto y = encode_word(kp, l, 1, 2);
  const auto z = encode_word(kp, l, 1, 4);
  const auto w = encode_word(kp, l, 1, 8);
  // x + x dies; adding the others afterwards must not revive a valid fp.
  const std::vector<fp::EncodedWord> chain{x, x, y, z, w};
  EXPECT_EQ(kp.decrypt(bb_add_chain(cfg, chain).ct), 0U);
  // Pairwise: a dead word contributes no fingerprint bits.
  const auto dead = bb_add(cfg, x, x);
  const auto revived = bb_add(cfg, bb_add(cfg, bb_add(cfg, dead, y), z), w);
  EXPECT_FALSE(fp::verify_result(kp, revived, 0b1111).accepted());
}

TEST(Overflow, SelfAdditionIsNullified) {
  const auto l = WordLayout::Make(12, 4);
  const auto kp = word_key(l);
  const auto cfg = BlackboxConfig::CompleteBinary(l);
  const auto x = encode_word(kp, l, 3, 1);
  for (std::uint64_t reps : {16U, 17U}) {
    std::vector<fp::EncodedWord> chain(reps, x);
    EXPECT_EQ(kp.decrypt(bb_add_chain(cfg, chain).ct), 0U) << reps;
  }
  // Unguarded: the fingerprint wraps back to 1 and its carry lands in comp.
  std::vector<fp::EncodedWord> chain(17, x);
  EXPECT_EQ(fp::decode_split(kp, bb_add_chain(BlackboxConfig::Unguarded(l), chain)), (fp::Split{52, 1}));
}

TEST(Scale, MatchesRepeatedAddition) {
  const auto l = WordLayout::Make(8, 6);
  const auto kp = word_key(l);
  const auto cfg = BlackboxConfig::IntegerFp(l);
  const auto x = encode_word(kp, l, 3, 5);
  for (std::uint64_t k = 1; k <= 12; ++k) {
    const auto want = (k * 5 < 64 && k * l.pack(3, 5) < l.word_limit()) ? k * l.pack(3, 5) : 0;
    EXPECT_EQ(kp.decrypt(AdditionBlackbox(cfg).scale(x, k).ct), want) << k;
  }
}

// The homomorphic carry fold equals the plaintext predicate for every fp
// pair (and a few computation parts), m <= 6.
TEST(Carries, EquivalentToPlaintext) {
  for (unsigned m = 1; m <= 6; ++m) {
    const auto l = WordLayout::Make(2, m);
    const auto kp = word_key(l);
    std::vector<BlackboxConfig> cfgs{BlackboxConfig::CompleteBinary(l), BlackboxConfig::IntegerFp(l)};
    if (m >= 3) cfgs.push_back(BlackboxConfig::CompleteBinary(l, 2));
    for (const auto& cfg : cfgs) {
      const AdditionBlackbox box(cfg);
      for (std::uint64_t fa = 0; fa < l.fp_limit(); ++fa) {
        for (std::uint64_t fb = 0; fb < l.fp_limit(); ++fb) {
          const std::uint64_t ca = (fa + fb) % 4;
          const std::uint64_t cb = fa % 4;
          const std::uint64_t a = l.pack(ca, fa);
          const std::uint64_t b = l.pack(cb, fb);
          const auto flag = kp.decrypt(box.violation_flag(kp.encrypt(a), kp.encrypt(b)));
          ASSERT_EQ(flag, reference_violation(cfg, a, b) ? 1U : 0U)
              << "m=" << m << " mode=" << to_string(cfg.mode) << " a=" << a << " b=" << b;
          const auto sum = kp.decrypt(box.add({l, kp.encrypt(a)}, {l, kp.encrypt(b)}).ct);
          ASSERT_EQ(sum, reference_add(cfg, a, b));
        }
      }
    }
  }
}

TEST(Carries, RippleMatchesBinaryAddition) {
  const auto l = WordLayout::Make(3, 3);
  const auto kp = word_key(l);
  const AdditionBlackbox box(BlackboxConfig::Unguarded(l));
  for (std::uint64_t a = 0; a < 64; a += 3) {
    for (std::uint64_t b = 0; b < 64; b += 5) {
      const auto c = box.carries(kp.encrypt(a), kp.encrypt(b));
      ASSERT_EQ(c.size(), 6U);
      std::uint64_t carry = 0;
      for (unsigned j = 0; j < 6; ++j) {
        carry = (((a >> j) & 1) + ((b >> j) & 1) + carry) >> 1;
        ASSERT_EQ(kp.decrypt(c[j]), carry) << a << "+" << b << " bit " << j;
      }
    }
  }
}

TEST(FieldReduce, SubtractsModulusOnOverflow) {
  const auto l = WordLayout::Make(8, 4);
  const auto kp = word_key(l);
  const he::Evaluator ev;
  const auto one = kp.encrypt(1);
  const auto w = encode_word(kp, l, 40, 5);
  const auto mod = encode_word(kp, l, 32, 0);
  EXPECT_EQ(fp::decode_split(kp, field_reduce(ev, w, mod, kp.encrypt(1), one)), (fp::Split{8, 5}));
  EXPECT_EQ(fp::decode_split(kp, field_reduce(ev, w, mod, kp.encrypt(0), one)), (fp::Split{40, 5}));
}

TEST(Modes, ParseAndPrint) {
  for (const auto m : {BlackboxMode::kCarryNullify, BlackboxMode::kOverflowNullify, BlackboxMode::kUnguarded}) {
    EXPECT_EQ(parse_blackbox_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_blackbox_mode("maybe"), Error);
}

}  // namespace
}  // namespace fpdel::bb
