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
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fpdel/circuit.hpp"
#include "fpdel/error.hpp"
#include "fpdel/fingerprint.hpp"
#include "fpdel/log_mult.hpp"
#include "fpdel/plan.hpp"
#include "fpdel/protocol.hpp"

namespace fpdel::logmult {
namespace {

using fp::WordLayout;

std::uint64_t word(std::uint64_t comp, std::uint64_t fp, unsigned m) { return comp << m | fp; }

TEST(LogEncoding, PowersOfTwo) {
  EXPECT_EQ(to_log_encoding(4), 2U);
  EXPECT_EQ(to_log_encoding(8), 3U);
  EXPECT_EQ(to_log_encoding(1), 0U);
  for (unsigned j = 0; j < 16; ++j) EXPECT_EQ(to_log_encoding(std::uint64_t{1} << j), j);
  EXPECT_THROW(to_log_encoding(0), Error);
  EXPECT_THROW(to_log_encoding(6), Error);
}

TEST(Split, Widths) {
  const auto s = FpSplit::Make(WordLayout::Make(8, 8), 3);
  EXPECT_EQ(s.m_a, 5U);
  EXPECT_EQ(s.m_c, 3U);
  EXPECT_EQ(s.counter_mask(), 7U);
  EXPECT_THROW(FpSplit::Make(WordLayout::Make(4, 4), 5), Error);
}

TEST(Tables, WorkedRows) {
  const auto l6 = WordLayout::Make(6, 6);
  const auto exp6 = LutTable::Open(LutDirection::kExp, l6, FpSplit::Make(l6, 3));
  EXPECT_EQ(exp6.lookup(0b000101'011000), 0b100000'011001U);

  const auto l8 = WordLayout::Make(8, 8);
  const auto split = FpSplit::Make(l8, 3);
  const auto exp8 = LutTable::Open(LutDirection::kExp, l8, split);
  const auto log8 = LutTable::Open(LutDirection::kLog, l8, split);
  EXPECT_EQ(exp8.lookup(0b00000111'01111010), 0b10000000'01111011U);
  EXPECT_EQ(log8.lookup(0b01000000'00111001), 0b00000110'00111010U);
  // Exp of 0 is 1.
  EXPECT_EQ(exp8.lookup(word(0, 0b1000, 8)), word(1, 0b1001, 8));
}

TEST(Tables, MissingRowsYieldZero) {
  const auto l = WordLayout::Make(6, 6);
  const auto split = FpSplit::Make(l, 2);
  const auto exp = LutTable::Open(LutDirection::kExp, l, split);
  const auto log = LutTable::Open(LutDirection::kLog, l, split);
  EXPECT_EQ(log.lookup(word(3, 4, 6)), 0U);          // not a power of two
  EXPECT_EQ(exp.lookup(word(6, 4, 6)), 0U);          // 2^6 does not fit
  EXPECT_EQ(exp.lookup(word(1, 0b000011, 6)), 0U);   // saturated counter
  EXPECT_EQ(exp.lookup(0), 0U);
}

TEST(Tables, LogAfterExpAddsTwoToCounter) {
  const auto l = WordLayout::Make(6, 6);
  const auto split = FpSplit::Make(l, 2);
  const auto exp = LutTable::Open(LutDirection::kExp, l, split);
  const auto log = LutTable::Open(LutDirection::kLog, l, split);
  for (std::uint64_t c = 0; c < 6; ++c) {
    for (std::uint64_t fa = 1; fa < 16; ++fa) {
      const std::uint64_t w = word(c, fa << 2, 6);
      const std::uint64_t back = log.lookup(exp.lookup(w));
      ASSERT_EQ(l.comp_of(back), c);
      ASSERT_EQ(l.fp_of(back), (fa << 2) + 2);
    }
  }
}

TEST(Tables, PinnedRowsAreASubset) {
  const auto l = WordLayout::Make(6, 6);
  const auto split = FpSplit::Make(l, 2);
  const std::vector<std::uint64_t> fps{0b000100};
  const auto pinned = LutTable::Pinned(LutDirection::kExp, l, split, fps);
  const auto open = LutTable::Open(LutDirection::kExp, l, split);
  EXPECT_LT(pinned.rows.size(), open.rows.size());
  for (const auto& r : pinned.rows) EXPECT_EQ(open.lookup(r.key), r.out);
  EXPECT_EQ(pinned.lookup(word(2, 0b001000, 6)), 0U);
}

class Devices : public ::testing::Test {
 protected:
  WordLayout layout = WordLayout::Make(5, 5);
  FpSplit split = FpSplit::Make(layout, 2);
  he::KeyPair kp = he::keygen(he::SlotKind::Word(layout.word_bits()));
};

TEST_F(Devices, ApplyMatchesCleartextTable) {
  for (const auto dir : {LutDirection::kExp, LutDirection::kLog}) {
    const auto table = LutTable::Open(dir, layout, split);
    const auto device = LutDevice::Build(kp, table);
    for (std::uint64_t w = 0; w < layout.word_limit(); w += 7) {
      const auto out = apply_lut(device, {layout, kp.encrypt(w)});
      ASSERT_EQ(kp.decrypt(out.ct), table.lookup(w)) << to_string(dir) << " " << w;
    }
  }
}

TEST_F(Devices, ApplyNeverDecrypts) {
  const auto device = LutDevice::Build(kp, LutTable::Open(LutDirection::kExp, layout, split));
  const auto in = fp::encode_word(kp, layout, 3, 0b00100);
  const auto before = he::simulator_counters().decrypts;
  const auto out = device.apply(in);
  EXPECT_EQ(he::simulator_counters().decrypts, before);
  EXPECT_EQ(fp::decode_split(kp, out), (fp::Split{8, 0b00101}));
}

TEST_F(Devices, JsonRoundTrip) {
  const auto device = LutDevice::Build(kp, LutTable::Open(LutDirection::kLog, layout, split));
  const auto back = LutDevice::FromJson(device.ToJson());
  EXPECT_EQ(back.size(), device.size());
  EXPECT_EQ(back.direction(), LutDirection::kLog);
  const auto in = fp::encode_word(kp, layout, 16, 0b01000);
  EXPECT_EQ(kp.decrypt(back.apply(in).ct), kp.decrypt(device.apply(in).ct));
}

TEST_F(Devices, RejectsForeignLayout) {
  const auto device = LutDevice::Build(kp, LutTable::Open(LutDirection::kExp, layout, split));
  const fp::EncodedWord other{WordLayout::Make(4, 6), kp.encrypt(1)};
  EXPECT_THROW(device.apply(other), Error);
}

TEST(Compile, LogMultExamplePlan) {
  const auto plan = compile_circuit(circuit::worked_logmult_example(), CompileMode::kAuto, 3);
  EXPECT_EQ(plan.mode, PlanMode::kLogMult);
  std::vector<StepKind> kinds;
  for (const auto& s : plan.steps) kinds.push_back(s.kind);
  EXPECT_EQ(kinds, (std::vector<StepKind>{StepKind::kAdd, StepKind::kExp, StepKind::kAddConst, StepKind::kLog,
                                          StepKind::kAddConst, StepKind::kExp}));
  ASSERT_EQ(plan.sources.size(), 4U);
  EXPECT_EQ(plan.sources[0].name, "x");
  EXPECT_EQ(plan.sources[0].domain, Domain::kLog);
  EXPECT_EQ(plan.sources[2].value, 32U);
  EXPECT_EQ(plan.sources[3].value, 1U);  // log2 of the constant 2
  EXPECT_EQ(plan.sources[3].domain, Domain::kLog);
}

TEST(Compile, LogMultExampleTrace) {
  const auto l = WordLayout::Make(8, 8);
  const auto cp = compile_circuit(circuit::worked_logmult_example(), fp::FingerprintScheme::Complete(4), l,
                                  FpSplit::Make(l, 3));
  EXPECT_EQ(cp.source_fp, (std::vector<std::uint64_t>{8, 16, 32, 64}));
  EXPECT_EQ(cp.trace, (std::vector<std::uint64_t>{0b00011000, 0b00011001, 0b00111001, 0b00111010, 0b01111010,
                                                  0b01111011}));
  EXPECT_EQ(cp.expected_fp, 0b01111011U);
  EXPECT_EQ(evaluate_plan(cp.plan, source_values(cp.plan, {{"x", 4}, {"y", 8}})), 128U);
}

TEST(Compile, CounterBudgetIsEnforced) {
  const auto l = WordLayout::Make(8, 8);
  EXPECT_THROW(compile_circuit(circuit::worked_logmult_example(), fp::FingerprintScheme::Complete(4), l,
                               FpSplit::Make(l, 1)),
               Error);
}

TEST(Compile, IdentityCircuitIsEmpty) {
  circuit::CircuitBuilder b;
  const auto plan = compile_circuit(b.build(b.input("x")), CompileMode::kAuto, 0);
  EXPECT_TRUE(plan.steps.empty());
  EXPECT_EQ(plan.sources.size(), 1U);
}

TEST(Compile, LinearExampleUsesScale) {
  const auto plan = compile_circuit(circuit::worked_linear_example(), CompileMode::kAuto, 0);
  EXPECT_EQ(plan.mode, PlanMode::kWord);
  ASSERT_EQ(plan.steps.size(), 3U);
  EXPECT_EQ(plan.steps[0].kind, StepKind::kScale);
  EXPECT_EQ(plan.steps[0].scalar, 2U);
  EXPECT_TRUE(plan_scales(plan));

  // A scale step doubles a fingerprint bit, which carry nullification zeroes.
  const auto layout = WordLayout::Make(6, 6);
  EXPECT_THROW(compile_circuit(circuit::worked_linear_example(), fp::FingerprintScheme::Complete(3), layout,
                               FpSplit::Make(layout, 0), CompileMode::kAuto),
               Error);
}

TEST(Compile, UnannotatedScalingGetsIntegerFingerprints) {
  circuit::CircuitBuilder b;
  const auto x = b.input("x");
  const auto three = b.constant(3);
  const auto c = b.build(b.add(b.mul(three, x), b.input("y")));
  protocol::Delegator d;
  const auto prepared = d.prepare_word(c, {{"x", 5}, {"y", 2}});
  const auto vr = protocol::verify_response(prepared.context, protocol::serve_honest(prepared.request));
  ASSERT_TRUE(vr.accepted()) << vr.reason;
  EXPECT_EQ(vr.comp_value, 17U);
}

TEST(Compile, WordModeRejectsVariableProducts) {
  EXPECT_THROW(compile_circuit(circuit::worked_logmult_example(), CompileMode::kWord, 0), Error);
}

TEST(PlanJson, RoundTripDropsNames) {
  const auto plan = compile_circuit(circuit::worked_logmult_example(), CompileMode::kAuto, 3);
  const auto j = plan.ToJson();
  EXPECT_EQ(j.dump().find("\"x\""), std::string::npos);
  const auto back = ExecutionPlan::FromJson(j);
  EXPECT_EQ(back.steps, plan.steps);
  EXPECT_EQ(back.counter_bits, 3U);
  EXPECT_EQ(back.mode, PlanMode::kLogMult);
}

TEST(PlanEdit, WithoutStepRedirects) {
  const auto plan = compile_circuit(circuit::worked_logmult_example(), CompileMode::kAuto, 3);
  const auto cut = plan.without_step(5);
  EXPECT_EQ(cut.steps.size(), 5U);
  EXPECT_NO_THROW(cut.validate());
  const auto mid = plan.without_step(1);
  EXPECT_EQ(mid.steps[1].lhs, Ref::Step(0));
}

// Random polynomials with power-of-two inputs: the honest server result
// equals plaintext evaluation.
TEST(Compile, RandomPolynomialsMatchPlaintext) {
  std::mt19937_64 rng(33);
  protocol::Delegator d;
  protocol::WordOptions opts;
  opts.layout = WordLayout::Make(6, 10);
  opts.counter_bits = 2;
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    circuit::CircuitBuilder b;
    const std::size_t terms = 1 + rng() % 2;
    std::size_t acc = 0;
    for (std::size_t k = 0; k < terms; ++k) {
      const std::size_t degree = 1 + rng() % 2;
      std::size_t mono = b.input(rng() % 2 ? "x" : "y");
      for (std::size_t e = 1; e < degree; ++e) mono = b.mul(mono, b.input(rng() % 2 ? "x" : "y"));
      if (rng() % 2) mono = b.mul(b.constant(2), mono);
      acc = k == 0 ? mono : b.add(acc, mono);
    }
    const auto c = b.build(acc);
    const std::uint64_t x = std::uint64_t{1} << (rng() % 3);
    const std::uint64_t y = std::uint64_t{1} << (rng() % 3);
    const double want = c.evaluate({{"x", static_cast<double>(x)}, {"y", static_cast<double>(y)}});
    if (want >= 64) continue;
    const auto prepared = d.prepare_word(c, {{"x", x}, {"y", y}}, std::nullopt, opts);
    const auto vr = protocol::verify_response(prepared.context, protocol::serve_honest(prepared.request));
    ASSERT_TRUE(vr.accepted()) << c.ToJson().dump() << " " << vr.reason;
    ASSERT_EQ(*vr.comp_value, static_cast<std::uint64_t>(want)) << c.ToJson().dump();
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

}  // namespace
}  // namespace fpdel::logmult
