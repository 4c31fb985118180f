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

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fpdel/adversary.hpp"
#include "fpdel/circuit.hpp"
#include "fpdel/envelope.hpp"
#include "fpdel/error.hpp"
#include "fpdel/protocol.hpp"

namespace fpdel::protocol {
namespace {

using fp::WordLayout;

bool legal(const std::vector<std::string>& transcript, const std::vector<std::string>& ops) {
  return std::all_of(transcript.begin(), transcript.end(),
                     [&](const std::string& t) { return std::find(ops.begin(), ops.end(), t) != ops.end(); });
}

TEST(PrepareRequest, LinearExample) {
  const auto layout = WordLayout::Make(6, 6);
  const auto kp = he::keygen(he::SlotKind::Word(12));
  const auto [req, expected] = prepare_request(circuit::worked_linear_example(), {{"x", 4}, {"y", 7}},
                                               fp::FingerprintScheme::Integer({3, 2, 3}), layout, kp);
  EXPECT_EQ(expected, 11U);
  ASSERT_EQ(req.inputs.size(), 3U);
  EXPECT_EQ(kp.decrypt(req.inputs[0]), 259U);
  EXPECT_EQ(kp.decrypt(req.inputs[1]), 450U);
  EXPECT_EQ(kp.decrypt(req.inputs[2]), 195U);
  EXPECT_EQ(req.mode, Mode::kWord);
  EXPECT_FALSE(req.exp_lut);

  const auto resp = serve_honest(req);
  EXPECT_EQ(kp.decrypt(resp.result), 1163U);
  const auto v = fp::verify_result(kp, {layout, resp.result}, expected);
  EXPECT_TRUE(v.accepted());
  EXPECT_EQ(v.comp_value, 18U);
}

TEST(PrepareRequest, IdentityCircuitEchoesInput) {
  circuit::CircuitBuilder b;
  const auto c = b.build(b.input("x", 5));
  const auto layout = WordLayout::Make(6, 6);
  const auto kp = he::keygen(he::SlotKind::Word(12));
  const auto [req, expected] = prepare_request(c, {{"x", 9}}, fp::FingerprintScheme::Integer({5}), layout, kp);
  EXPECT_EQ(expected, 5U);
  EXPECT_EQ(kp.decrypt(serve_honest(req).result), layout.pack(9, 5));
}

TEST(PrepareRequest, LogMultExample) {
  const auto layout = WordLayout::Make(8, 8);
  const auto kp = he::keygen(he::SlotKind::Word(16));
  WordOptions opts;
  opts.layout = layout;
  opts.counter_bits = 3;
  const auto [req, expected] = prepare_request(circuit::worked_logmult_example(), {{"x", 4}, {"y", 8}},
                                               fp::FingerprintScheme::Complete(4), layout, kp, opts);
  EXPECT_EQ(expected, 0b01111011U);
  EXPECT_EQ(req.mode, Mode::kLogMult);
  ASSERT_TRUE(req.exp_lut && req.log_lut);
  EXPECT_EQ(kp.decrypt(serve_honest(req).result), 0b10000000'01111011U);
}

TEST(PrepareRequest, RejectsOutOfRangeInputs) {
  const auto layout = WordLayout::Make(6, 6);
  const auto kp = he::keygen(he::SlotKind::Word(12));
  EXPECT_THROW(prepare_request(circuit::worked_linear_example(), {{"x", 64}, {"y", 7}},
                               fp::FingerprintScheme::Integer({3, 2, 3}), layout, kp),
               Error);
  EXPECT_THROW(prepare_request(circuit::worked_linear_example(), {{"x", 4}},
                               fp::FingerprintScheme::Integer({3, 2, 3}), layout, kp),
               Error);
}

TEST(Verify, Outcomes) {
  Delegator d;
  WordOptions opts;
  const auto p = d.prepare_word(circuit::worked_linear_example(), {{"x", 4}, {"y", 7}}, std::nullopt, opts);
  const auto& kp = p.context.kp;
  const auto ok = verify_response(p.context, {kp.encrypt(1163), std::nullopt, {}});
  EXPECT_TRUE(ok.accepted());
  EXPECT_EQ(ok.comp_value, 18U);
  const auto zero = verify_response(p.context, {kp.encrypt(0), std::nullopt, {}});
  EXPECT_EQ(zero.outcome, fp::Outcome::kNullified);
  EXPECT_FALSE(zero.escalate);
  EXPECT_EQ(verify_response(p.context, {kp.encrypt(1164), std::nullopt, {}}).outcome, fp::Outcome::kRejected);

  const auto other = he::keygen(he::SlotKind::Word(12));
  try {
    verify_response(p.context, {other.encrypt(1163), std::nullopt, {}});
    FAIL() << "foreign key accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKeyMismatch);
  }
}

TEST(Verify, ZeroInputsEscalateNullification) {
  Delegator d;
  const auto p = d.prepare_word(circuit::worked_linear_example(), {{"x", 0}, {"y", 7}});
  EXPECT_TRUE(p.context.zero_result_possible);
  const auto r = verify_response(p.context, {p.context.kp.encrypt(0), std::nullopt, {}});
  EXPECT_EQ(r.outcome, fp::Outcome::kNullified);
  EXPECT_TRUE(r.escalate);
}

TEST(Verify, WrongMaskingGuessIsRejected) {
  const adversary::MaskingScenario s;
  int rejected = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    auto rng = stats::trial_rng(99, t);
    const auto r = adversary::attack_omit_and_mask(s, rng);
    if (!r.detail.value("guess_right", false)) {
      ASSERT_NE(r.outcome, adversary::TrialOutcome::kAcceptedWrong) << r.ToJson().dump();
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 150);
}

TEST(Delegator, FreshKeysAndCachedFingerprints) {
  Delegator d;
  const auto c = circuit::worked_linear_example();
  const auto a = d.prepare_word(c, {{"x", 4}, {"y", 7}});
  const auto b = d.prepare_word(c, {{"x", 9}, {"y", 1}});
  EXPECT_NE(a.context.kp.key_id(), b.context.kp.key_id());
  EXPECT_EQ(d.cache().misses(), 1U);
  EXPECT_EQ(d.cache().hits(), 1U);
  EXPECT_EQ(a.context.expected_fp, b.context.expected_fp);
  const auto vb = verify_response(b.context, serve_honest(b.request));
  EXPECT_TRUE(vb.accepted());
  EXPECT_EQ(vb.comp_value, 2U * 9 + 1 + 3);
}

TEST(Server, HonestRunIsConfinedAndBlind) {
  Delegator d;
  WordOptions opts;
  opts.layout = WordLayout::Make(8, 8);
  opts.counter_bits = 3;
  const auto p = d.prepare_word(circuit::worked_logmult_example(), {{"x", 4}, {"y", 8}}, std::nullopt, opts);
  const auto before = he::simulator_counters().decrypts;
  const auto resp = serve_honest(p.request);
  EXPECT_EQ(he::simulator_counters().decrypts, before);
  EXPECT_TRUE(legal(resp.transcript, legal_word_ops()));
  EXPECT_EQ(resp.transcript.size(), 6U);
  EXPECT_TRUE(verify_response(p.context, resp).accepted());
}

TEST(Server, EmptyPlanEchoesFirstInput) {
  circuit::CircuitBuilder b;
  const auto c = b.build(b.input("x"));
  Delegator d;
  const auto p = d.prepare_word(c, {{"x", 5}});
  const auto resp = serve_honest(p.request);
  EXPECT_TRUE(resp.transcript.empty());
  EXPECT_EQ(verify_response(p.context, resp).comp_value, 5U);
}

TEST(Server, RandomAdditionPlansMatchPlaintext) {
  std::mt19937_64 rng(2024);
  Delegator d;
  WordOptions opts;
  opts.layout = WordLayout::Make(10, 8);
  for (int t = 0; t < 1000; ++t) {
    circuit::CircuitBuilder b;
    const std::size_t leaves = 1 + rng() % 5;
    std::map<std::string, std::uint64_t> in;
    std::map<std::string, double> at;
    std::size_t acc = 0;
    for (std::size_t k = 0; k < leaves; ++k) {
      const std::string name = "v" + std::to_string(k % 3);
      in[name] = rng() % 20;
      at[name] = static_cast<double>(in[name]);
      std::size_t leaf = b.input(name);
      if (rng() % 3 == 0) leaf = b.mul(b.constant(static_cast<double>(2 + rng() % 3)), leaf);
      acc = k == 0 ? leaf : b.add(acc, leaf);
    }
    const auto c = b.build(acc);
    const auto p = d.prepare_word(c, in, std::nullopt, opts);
    const auto vr = verify_response(p.context, serve_honest(p.request));
    ASSERT_TRUE(vr.accepted()) << c.ToJson().dump() << " " << vr.reason;
    ASSERT_EQ(*vr.comp_value, static_cast<std::uint64_t>(c.evaluate(at)));
  }
}

// Honest delegation of random polynomials (degree <= 3, <= 3 variables,
// power-of-two inputs) is always accepted with the plaintext value.
TEST(EndToEnd, RandomPolynomialsAccepted) {
  std::mt19937_64 rng(77);
  Delegator d;
  WordOptions opts;
  opts.layout = WordLayout::Make(6, 10);
  opts.counter_bits = 2;
  const std::vector<std::string> vars{"x", "y", "z"};
  int checked = 0;
  for (int t = 0; t < 80; ++t) {
    circuit::CircuitBuilder b;
    const std::size_t terms = 1 + rng() % 2;
    std::size_t acc = 0;
    for (std::size_t k = 0; k < terms; ++k) {
      const std::size_t degree = 1 + rng() % 3;
      std::size_t mono = b.input(vars[rng() % 3]);
      for (std::size_t e = 1; e < degree; ++e) mono = b.mul(mono, b.input(vars[rng() % 3]));
      acc = k == 0 ? mono : b.add(acc, mono);
    }
    const auto c = b.build(acc);
    std::map<std::string, std::uint64_t> in;
    std::map<std::string, double> at;
    for (const auto& v : vars) {
      in[v] = std::uint64_t{1} << (rng() % 3);
      at[v] = static_cast<double>(in[v]);
    }
    const double want = c.evaluate(at);
    if (want >= 64) continue;
    const auto p = d.prepare_word(c, in, std::nullopt, opts);
    const auto vr = verify_response(p.context, serve_honest(p.request));
    ASSERT_TRUE(vr.accepted()) << c.ToJson().dump();
    ASSERT_EQ(*vr.comp_value, static_cast<std::uint64_t>(want));
    ++checked;
  }
  EXPECT_GT(checked, 40);
}

TEST(Envelope, WordRoundTripAcrossTheWire) {
  Delegator d;
  WordOptions opts;
  opts.layout = WordLayout::Make(8, 8);
  opts.counter_bits = 3;
  const auto p = d.prepare_word(circuit::worked_logmult_example(), {{"x", 2}, {"y", 16}}, std::nullopt, opts);
  const auto wire = request_to_json(p.request).dump();
  EXPECT_EQ(wire.find("secret"), std::string::npos);
  const auto j = nlohmann::json::parse(wire);
  EXPECT_EQ(j.at("version"), kEnvelopeVersion);
  EXPECT_EQ(j.at("mode"), "logmult");
  const auto req = request_from_json(j);
  const auto resp_wire = response_to_json(serve_honest(req)).dump();
  const auto ctx = DelegatorContext::FromJson(nlohmann::json::parse(p.context.ToJson().dump()));
  const auto vr = verify_response(ctx, response_from_json(nlohmann::json::parse(resp_wire)));
  EXPECT_TRUE(vr.accepted());
  EXPECT_EQ(vr.comp_value, 128U);
}

TEST(Envelope, RejectsBadVersionsAndModes) {
  EXPECT_THROW(request_from_json({{"version", 99}}), Error);
  EXPECT_THROW(parse_mode("quantum"), Error);
  EXPECT_THROW(response_from_json(nlohmann::json::array()), Error);
}

TEST(Simd, EndToEnd) {
  Delegator d;
  const auto p = d.prepare_simd(circuit::worked_simd_polynomial(), {{"x", {4.0, 0.5}}, {"y", {7.0, 2.0}}});
  EXPECT_EQ(p.request.inputs.size(), 2U);
  const auto resp = serve_honest(p.request);
  EXPECT_TRUE(legal(resp.transcript, legal_simd_ops()));
  ASSERT_TRUE(resp.trace);
  const auto vr = verify_response(p.context, resp);
  ASSERT_TRUE(vr.accepted()) << vr.reason;
  EXPECT_NEAR(vr.comp_slots[0], 199.6, 1e-9);
  EXPECT_NEAR(vr.comp_slots[1], 15.1, 1e-9);

  const auto wire = request_to_json(p.request);
  EXPECT_EQ(wire.dump().find("fp_slot"), std::string::npos);
  const auto again = verify_response(p.context, response_from_json(response_to_json(serve_honest(request_from_json(wire)))));
  EXPECT_TRUE(again.accepted());
}

TEST(Simd, LinterGuardsThePrepareStep) {
  circuit::CircuitBuilder b;
  const auto x = b.input("x", 3);
  const auto c = b.build(b.sub(x, b.constant(1.0)), true);
  Delegator d;
  try {
    d.prepare_simd(c, {{"x", {1.0, 2.0}}});
    FAIL() << "subtraction was delegated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupported);
  }
}

}  // namespace
}  // namespace fpdel::protocol
