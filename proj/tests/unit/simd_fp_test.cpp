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
#include <vector>

#include <gtest/gtest.h>

#include "fpdel/circuit.hpp"
#include "fpdel/error.hpp"
#include "fpdel/simd_fp.hpp"

namespace fpdel::simd {
namespace {

class Polynomial : public ::testing::Test {
 protected:
  SimdLayout layout{3, 2};
  CompiledSimd compiled = compile_simd(circuit::worked_simd_polynomial());
  he::KeyPair kp = he::keygen(he::SlotKind::Simd(3, 4));
  std::vector<double> xs{4.0, 0.5};
  std::vector<double> ys{7.0, 2.0};

  std::vector<SimdVector> inputs() const {
    return {encode_simd(kp, xs, 3, layout.fp_slot), encode_simd(kp, ys, 4, layout.fp_slot)};
  }
  std::vector<SimdVector> consts() const {
    std::vector<SimdVector> out;
    for (const auto& c : compiled.consts) out.push_back(encode_const(kp, layout, c));
    return out;
  }
  double expected_fp() const { return expected_simd_fp(compiled.program, std::vector<double>{3, 4}, compiled.consts); }
  static double poly(double x, double y) { return (((2 * x) + 1.5) * (y * 3)) + 0.1; }
};

TEST_F(Polynomial, CompilesToFiveSteps) {
  EXPECT_EQ(compiled.input_names, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(compiled.program.steps.size(), 5U);
  // 2 * x already costs a level: constants are encrypted.
  EXPECT_EQ(compiled.program.depth_cost(), 2U);
  std::vector<double> fps;
  for (const auto& c : compiled.consts) fps.push_back(c.fp);
  EXPECT_TRUE(lint_program(compiled.program, fps, 4).empty());
}

TEST_F(Polynomial, ExecutesElementwise) {
  const auto in = inputs();
  const auto cs = consts();
  const auto exec = simd_execute(compiled.program, in, cs);
  const auto slots = kp.decrypt_slots(exec.result.ct);
  const auto comp = comp_slots(layout, slots);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(comp[k], poly(xs[k], ys[k]), 1e-6);
  EXPECT_DOUBLE_EQ(slots[2], expected_fp());
  EXPECT_TRUE(exec.trace.matches(compiled.program));
}

TEST_F(Polynomial, VerifyAcceptsHonestAndRejectsDeviations) {
  const auto in = inputs();
  const auto cs = consts();
  const auto exec = simd_execute(compiled.program, in, cs);
  const auto ok = verify_simd(kp, exec.result, expected_fp(), &exec.trace, &compiled.program);
  EXPECT_TRUE(ok.accepted());
  EXPECT_EQ(ok.comp.size(), 2U);

  EXPECT_FALSE(verify_simd(kp, exec.result, expected_fp() + 1).accepted());

  auto extra = exec.trace;
  extra.steps.push_back({OpKind::kMul, Operand::Step(4), Operand::Step(4)});
  const auto bad = verify_simd(kp, exec.result, expected_fp(), &extra, &compiled.program);
  EXPECT_FALSE(bad.accepted());
  EXPECT_FALSE(bad.trace_ok);
}

TEST_F(Polynomial, SlotsAreIsolated) {
  const auto cs = consts();
  const auto base = kp.decrypt_slots(simd_execute(compiled.program, inputs(), cs).result.ct);
  xs[0] = 100.0;
  const auto moved = kp.decrypt_slots(simd_execute(compiled.program, inputs(), cs).result.ct);
  EXPECT_NE(base[0], moved[0]);
  EXPECT_EQ(base[1], moved[1]);
  EXPECT_EQ(base[2], moved[2]);
}

TEST_F(Polynomial, TraceAsCircuitEvaluatesLikeTheProgram) {
  const auto exec = simd_execute(compiled.program, inputs(), consts());
  const auto c = exec.trace.to_circuit(2, compiled.consts.size());
  std::map<std::string, double> at{{"i0", 4.0}, {"i1", 7.0}};
  std::vector<double> cv;
  for (std::size_t k = 0; k < compiled.consts.size(); ++k) {
    at["c" + std::to_string(k)] = compiled.consts[k].comp;
    cv.push_back(compiled.consts[k].comp);
  }
  const std::vector<double> iv{4.0, 7.0};
  EXPECT_NEAR(c.evaluate(at), evaluate_slot(compiled.program, iv, cv), 1e-12);
  EXPECT_NEAR(c.evaluate(at), poly(4, 7), 1e-9);
  const auto back = TraceCircuit::FromJson(exec.trace.ToJson());
  EXPECT_TRUE(back.matches(compiled.program));
}

TEST(SimdEncode, LayoutAndIdentityBan) {
  const auto kp = he::keygen(he::SlotKind::Simd(3, 2));
  const std::vector<double> x{4.0, 0.5};
  const auto v = encode_simd(kp, x, 3, 2);
  EXPECT_EQ(kp.decrypt_slots(v.ct), (std::vector<double>{4.0, 0.5, 3.0}));
  EXPECT_THROW(encode_simd(kp, x, 1, 2), Error);
  EXPECT_THROW(encode_simd(kp, x, 2.5, 2), Error);
  EXPECT_THROW(encode_simd(kp, x, 3, 3), Error);
}

TEST(SimdLint, Findings) {
  SimdProgram sub{1, 1, {{OpKind::kSub, Operand::Input(0), Operand::Const(0)}}};
  const std::vector<double> ok{2.0};
  auto f = lint_program(sub, ok, 2);
  ASSERT_EQ(f.size(), 1U);
  EXPECT_EQ(f[0].code, LintFinding::Code::kSubtraction);

  SimdProgram add{1, 1, {{OpKind::kAddConst, Operand::Input(0), Operand::Const(0)}}};
  const std::vector<double> frac{1.5};
  f = lint_program(add, frac, 2);
  ASSERT_EQ(f.size(), 1U);
  EXPECT_EQ(f[0].code, LintFinding::Code::kConstFractional);
  EXPECT_EQ(lint_program(add, std::vector<double>{1.0}, 2).at(0).code, LintFinding::Code::kConstIdentity);
  EXPECT_EQ(lint_program(add, std::vector<double>{-3.0}, 2).at(0).code, LintFinding::Code::kConstNegative);

  SimdProgram two{1, 2, {{OpKind::kAddConst, Operand::Input(0), Operand::Const(0)},
                         {OpKind::kAddConst, Operand::Step(0), Operand::Const(1)}}};
  EXPECT_EQ(lint_program(two, std::vector<double>{3.0, 3.0}, 2).at(0).code, LintFinding::Code::kConstDuplicate);

  SimdProgram div{1, 1, {{OpKind::kDiv, Operand::Input(0), Operand::Const(0)}}};
  EXPECT_EQ(lint_program(div, ok, 2).at(0).code, LintFinding::Code::kDivision);
}

TEST(SimdCompile, DefaultStandInsAreDistinct) {
  circuit::CircuitBuilder b;
  const auto x = b.input("x", 3);
  const auto half = b.constant(0.5);
  const auto quarter = b.constant(0.25, 2);
  const auto seven = b.constant(7.0);
  const auto t = b.add(b.mul(x, half), quarter);
  const auto c = compile_simd(b.build(b.add(t, seven), true));
  ASSERT_EQ(c.consts.size(), 3U);
  EXPECT_EQ(c.consts[0].fp, 3.0);
  EXPECT_EQ(c.consts[1].fp, 2.0);
  EXPECT_EQ(c.consts[2].fp, 4.0);
}

TEST(SimdDepth, BudgetBoundary) {
  for (unsigned budget = 1; budget <= 3; ++budget) {
    SimdProgram p{1, 0, {}};
    for (unsigned d = 0; d < budget; ++d) {
      p.steps.push_back({OpKind::kMul, d == 0 ? Operand::Input(0) : Operand::Step(d - 1), Operand::Input(0)});
    }
    ASSERT_EQ(p.depth_cost(), budget);
    const auto kp = he::keygen(he::SlotKind::Simd(2, budget));
    const std::vector<SimdVector> in{encode_simd(kp, std::vector<double>{2.0}, 3, 1)};
    const auto exec = simd_execute(p, in, {});
    EXPECT_DOUBLE_EQ(kp.decrypt_slots(exec.result.ct)[0], std::pow(2.0, budget + 1));
    p.steps.push_back({OpKind::kMul, Operand::Step(budget - 1), Operand::Input(0)});
    EXPECT_THROW(simd_execute(p, in, {}), Error);
  }
}

TEST(SimdExecute, EmptyProgramEchoesInput) {
  const auto kp = he::keygen(he::SlotKind::Simd(3, 2));
  const std::vector<SimdVector> in{encode_simd(kp, std::vector<double>{1.25, 2.5}, 5, 0)};
  const auto exec = simd_execute(SimdProgram{1, 0, {}}, in, {});
  EXPECT_EQ(kp.decrypt_slots(exec.result.ct), (std::vector<double>{5.0, 1.25, 2.5}));
  EXPECT_TRUE(exec.trace.steps.empty());
}

// (x + 1e13) - 1e13: the fingerprint slot survives, the computation is lost.
TEST(SimdExecute, FloatHazardNeedsLinterBypass) {
  SimdProgram p{1, 2, {{OpKind::kAddConst, Operand::Input(0), Operand::Const(0)},
                       {OpKind::kSub, Operand::Step(0), Operand::Const(1)}}};
  const SimdLayout layout{3, 2};
  const auto kp = he::keygen(he::SlotKind::Simd(3, 2));
  const std::vector<SimdVector> in{encode_simd(kp, std::vector<double>{0.0001, 0.0001}, 7, 2)};
  const std::vector<SimdVector> cs{encode_const(kp, layout, {1e13, 4}), encode_const(kp, layout, {1e13, 4})};
  EXPECT_THROW(simd_execute(p, in, cs), Error);
  const auto exec = simd_execute(p, in, cs, {}, {.skip_lint = true});
  const auto slots = kp.decrypt_slots(exec.result.ct);
  EXPECT_EQ(slots[2], 7.0);
  EXPECT_NEAR(slots[0], 0.0, 1e-6);
  EXPECT_NE(slots[0], 0.0001);
  EXPECT_TRUE(verify_simd(kp, exec.result, 7.0).accepted());
}

TEST(SimdProgramJson, RoundTrip) {
  const auto p = compile_simd(circuit::worked_simd_polynomial()).program;
  EXPECT_EQ(SimdProgram::FromJson(p.ToJson()), p);
  EXPECT_THROW(SimdProgram::FromJson(nlohmann::json::object()), Error);
}

}  // namespace
}  // namespace fpdel::simd
