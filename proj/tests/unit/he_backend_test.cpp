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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fpdel/error.hpp"
#include "fpdel/he_backend.hpp"

namespace fpdel::he {
namespace {

std::uint64_t apply(GateKind g, std::uint64_t a, std::uint64_t b, std::uint64_t mask) {
  switch (g) {
    case GateKind::kAdd: return (a + b) & mask;
    case GateKind::kSub: return (a - b) & mask;
    case GateKind::kMul: return (a * b) & mask;
    case GateKind::kMulConst: break;
  }
  return 0;
}

TEST(Keygen, EchoesParametersAndIdsAreDistinct) {
  const auto a = keygen(SlotKind::Word(14));
  const auto b = keygen(SlotKind::Word(14));
  EXPECT_EQ(a.kind().tag, SlotTag::kWord);
  EXPECT_EQ(a.kind().modulus_bits, 14U);
  EXPECT_NE(a.key_id(), b.key_id());
  EXPECT_EQ(keygen(SlotKind::Bit()).kind().tag, SlotTag::kBit);
}

TEST(Encrypt, RoundTripsAndHandlesAreFresh) {
  const auto bit = keygen(SlotKind::Bit());
  EXPECT_EQ(bit.decrypt(bit.encrypt(1)), 1U);
  const auto word = keygen(SlotKind::Word(12));
  EXPECT_EQ(word.decrypt(word.encrypt(259)), 259U);
  EXPECT_EQ(word.decrypt(word.encrypt(1163)), 1163U);
  EXPECT_NE(word.encrypt(7).handle(), word.encrypt(7).handle());
}

TEST(Encrypt, RejectsOutOfRangePlaintexts) {
  EXPECT_THROW(keygen(SlotKind::Bit()).encrypt(2), Error);
  EXPECT_THROW(keygen(SlotKind::Word(4)).encrypt(16), Error);
  const auto simd = keygen(SlotKind::Simd(3, 2));
  EXPECT_THROW(simd.encrypt(std::uint64_t{1}), Error);
  EXPECT_THROW(simd.encrypt(std::vector<double>{1.0, 2.0}), Error);
}

TEST(Eval, SmallExamples) {
  const auto kp = keygen(SlotKind::Word(14));
  const Evaluator ev;
  EXPECT_EQ(kp.decrypt(ev.add(kp.encrypt(3), kp.encrypt(4))), 7U);
  EXPECT_EQ(kp.decrypt(ev.mul(kp.encrypt(2), kp.encrypt(3))), 6U);
  const auto b = kp.encrypt(9);
  EXPECT_EQ(kp.decrypt(ev.sub(b, b)), 0U);
  EXPECT_EQ(kp.decrypt(ev.mul_const(kp.encrypt(5), 3)), 15U);
}

TEST(Eval, BitSlotsLeaveBooleanRange) {
  const auto kp = keygen(SlotKind::Bit());
  const auto one = kp.encrypt(1);
  EXPECT_EQ(kp.decrypt(Evaluator{}.add(one, one)), 2U);
}

TEST(Eval, HomomorphismExhaustiveSmallModulus) {
  for (unsigned bits : {4U, 8U}) {
    const auto kp = keygen(SlotKind::Word(bits));
    const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
    const std::uint64_t step = bits == 8 ? 7 : 1;
    std::vector<Ciphertext> cts;
    for (std::uint64_t v = 0; v <= mask; v += step) cts.push_back(kp.encrypt(v));
    for (const auto g : {GateKind::kAdd, GateKind::kSub, GateKind::kMul}) {
      for (std::uint64_t a = 0, ia = 0; a <= mask; a += step, ++ia) {
        for (std::uint64_t b = 0, ib = 0; b <= mask; b += step, ++ib) {
          const auto r = eval(EvalGate{g, 0}, cts[ia], &cts[ib]);
          ASSERT_EQ(kp.decrypt(r), apply(g, a, b, mask)) << to_string(g) << " " << a << " " << b;
        }
      }
    }
  }
}

TEST(Eval, HomomorphismRandomWide) {
  std::mt19937_64 rng(7);
  const auto kp = keygen(SlotKind::Word(40));
  const std::uint64_t mask = (std::uint64_t{1} << 40) - 1;
  for (int t = 0; t < 500; ++t) {
    const std::uint64_t a = rng() & mask;
    const std::uint64_t b = rng() & mask;
    for (const auto g : {GateKind::kAdd, GateKind::kSub, GateKind::kMul}) {
      const auto ca = kp.encrypt(a);
      const auto cb = kp.encrypt(b);
      ASSERT_EQ(kp.decrypt(eval(EvalGate{g, 0}, ca, &cb)), apply(g, a, b, mask));
    }
  }
}

TEST(KeyIsolation, CrossKeyOperationsAreRejected) {
  const auto k1 = keygen(SlotKind::Word(8));
  const auto k2 = keygen(SlotKind::Word(8));
  const auto c1 = k1.encrypt(11);
  const auto c2 = k2.encrypt(11);
  try {
    k2.decrypt(c1);
    FAIL() << "decrypt with the wrong key succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKeyMismatch);
  }
  try {
    Evaluator{}.add(c1, c2);
    FAIL() << "eval across keys succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKeyMismatch);
  }
}

TEST(KeyIsolation, SlotKindMismatchIsRejected) {
  const auto simd = keygen(SlotKind::Simd(2, 2));
  const auto word = keygen(SlotKind::Word(8));
  EXPECT_THROW(word.decrypt_slots(word.encrypt(1)), Error);
  EXPECT_THROW(simd.decrypt(simd.encrypt(std::vector<double>{1.0, 2.0})), Error);
}

TEST(SimdDepth, ChainSucceedsIffWithinBudget) {
  for (unsigned budget = 1; budget <= 4; ++budget) {
    const auto kp = keygen(SlotKind::Simd(2, budget));
    const Evaluator ev;
    const std::vector<double> two{2.0, 3.0};
    auto acc = kp.encrypt(two);
    const auto x = kp.encrypt(two);
    for (unsigned d = 1; d <= budget; ++d) acc = ev.mul(acc, kp.encrypt(two));
    EXPECT_EQ(acc.levels(), 0U);
    EXPECT_DOUBLE_EQ(kp.decrypt_slots(acc)[0], std::pow(2.0, budget + 1));
    try {
      ev.mul(acc, x);
      FAIL() << "multiplication beyond the depth budget succeeded";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDepthExhausted);
    }
    // Constant scaling and addition are free.
    EXPECT_NO_THROW(ev.add(ev.mul_const(acc, 3), acc));
  }
}

TEST(Serialization, RoundTripsThroughBase64) {
  const auto kp = keygen(SlotKind::Word(12));
  const auto ct = kp.encrypt(1163);
  const auto blob = to_base64(simulator().serialize(ct));
  const auto back = simulator().deserialize(from_base64(blob));
  EXPECT_EQ(kp.decrypt(back), 1163U);
  EXPECT_THROW(simulator().deserialize("garbage"), Error);
  EXPECT_THROW(from_base64("abc"), Error);
}

TEST(Serialization, SecretExportRestoresDecryption) {
  const auto kp = keygen(SlotKind::Simd(3, 2));
  const auto ct = kp.encrypt(std::vector<double>{1.5, -2.0, 7.0});
  const auto restored = KeyPair::import_secret(kp.export_secret());
  EXPECT_EQ(restored.key_id(), kp.key_id());
  EXPECT_EQ(restored.decrypt_slots(ct), (std::vector<double>{1.5, -2.0, 7.0}));
}

TEST(Counters, EvaluationDoesNotDecrypt) {
  const auto kp = keygen(SlotKind::Word(10));
  const auto a = kp.encrypt(5);
  const auto before = simulator_counters();
  const Evaluator ev;
  auto x = ev.add(a, a);
  for (int i = 0; i < 10; ++i) x = ev.mul(x, a);
  const auto after = simulator_counters();
  EXPECT_EQ(after.decrypts, before.decrypts);
  EXPECT_EQ(after.evals - before.evals, 11U);
}

TEST(Observer, SeesEveryGate) {
  std::vector<GateKind> seen;
  const Evaluator ev([&](const EvalGate& g) { seen.push_back(g.kind); });
  const auto kp = keygen(SlotKind::Word(8));
  const auto a = kp.encrypt(3);
  ev.mul_const(ev.sub(ev.add(a, a), a), 2);
  EXPECT_EQ(seen, (std::vector<GateKind>{GateKind::kAdd, GateKind::kSub, GateKind::kMulConst}));
}

}  // namespace
}  // namespace fpdel::he
