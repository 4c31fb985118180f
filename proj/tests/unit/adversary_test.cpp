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
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fpdel/adversary.hpp"
#include "fpdel/circuit.hpp"
#include "fpdel/error.hpp"
#include "fpdel/protocol.hpp"

namespace fpdel::adversary {
namespace {

bool confined(const std::vector<std::string>& transcript, const std::vector<std::string>& ops) {
  return std::all_of(transcript.begin(), transcript.end(),
                     [&](const std::string& t) { return std::find(ops.begin(), ops.end(), t) != ops.end(); });
}

TEST(ConsistentLut, AlternatingTableUnderTwoKeys) {
  const std::vector keys{he::keygen(he::SlotKind::Bit()), he::keygen(he::SlotKind::Bit())};
  const auto report = attack_consistent_lut(blind::ClearLut::AlternatingParity(3), keys);
  ASSERT_EQ(report.runs.size(), 16U);
  EXPECT_TRUE(report.consistent());
  for (const auto& r : report.runs) {
    EXPECT_EQ(r.output, r.input & 1U);
    if (r.input == 0) EXPECT_EQ(r.output, 0U);
  }
  EXPECT_FALSE(report.transcript.empty());
}

TEST(ConsistentLut, RandomTablesAndWiderOutputs) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const auto lut = blind::ClearLut::FromFunction(3, 2, [&](std::uint64_t x) { return x == 0 ? 0 : rng() & 3U; });
    const std::vector keys{he::keygen(he::SlotKind::Bit()), he::keygen(he::SlotKind::Bit()),
                           he::keygen(he::SlotKind::Bit())};
    const auto report = attack_consistent_lut(lut, keys);
    EXPECT_EQ(report.runs.size(), 24U);
    EXPECT_TRUE(report.consistent());
  }
  const std::vector one{he::keygen(he::SlotKind::Bit())};
  EXPECT_TRUE(attack_consistent_lut(blind::ClearLut::Identity(4), one).consistent());
}

TEST(Masking, SuccessExactlyWhenTheGuessIsRight) {
  const MaskingScenario s;
  std::mt19937_64 rng(5);
  int right = 0;
  for (int t = 0; t < 400; ++t) {
    const auto r = attack_omit_and_mask(s, rng);
    EXPECT_TRUE(confined(r.transcript, protocol::legal_word_ops()));
    if (r.detail.at("guess_right").get<bool>()) {
      ++right;
      EXPECT_NE(r.outcome, TrialOutcome::kRejected);
    } else {
      EXPECT_TRUE(r.detected()) << r.ToJson().dump();
    }
  }
  EXPECT_GT(right, 0);
}

TEST(Masking, EnumerationRate) {
  for (unsigned m = 2; m <= 10; ++m) {
    const auto e = enumerate_masking_guesses(m);
    EXPECT_EQ(e.cases, static_cast<std::uint64_t>(m) * (m - 1) * 2 * (m - 1));
    EXPECT_EQ(e.successes * (2 * m - 2), e.cases) << "m=" << m;
  }
  EXPECT_THROW(enumerate_masking_guesses(1), Error);
}

TEST(Masking, RejectsDegenerateScenarios) {
  MaskingScenario s;
  s.inputs = 1;
  std::mt19937_64 rng(1);
  EXPECT_THROW(attack_omit_and_mask(s, rng), Error);
}

TEST(Overflow, DefendedBlackboxNullifies) {
  OverflowScenario s;
  std::mt19937_64 rng(3);
  const std::uint64_t wrap = std::uint64_t{1} << s.layout.m;
  for (int t = 0; t < 50; ++t) {
    EXPECT_EQ(attack_overflow_clear(s, wrap, rng).outcome, TrialOutcome::kNullified);
    EXPECT_EQ(attack_overflow_clear(s, wrap + 1, rng).outcome, TrialOutcome::kNullified);
    EXPECT_EQ(attack_overflow_clear(s, 1, rng).outcome, TrialOutcome::kAcceptedCorrect);
  }
}

TEST(Overflow, WeakBlackboxAcceptsWrapAround) {
  OverflowScenario s;
  s.defended = false;
  std::mt19937_64 rng(4);
  const std::uint64_t wrap = std::uint64_t{1} << s.layout.m;
  for (int t = 0; t < 50; ++t) {
    const auto r = attack_overflow_clear(s, wrap + 1, rng);
    EXPECT_EQ(r.outcome, TrialOutcome::kAcceptedWrong) << r.ToJson().dump();
    EXPECT_EQ(r.detail.at("fp"), 3U);
    EXPECT_EQ(attack_overflow_clear(s, wrap, rng).outcome, TrialOutcome::kRejected);
  }
  EXPECT_THROW(attack_overflow_clear(s, 0, rng), Error);
}

TEST(Subset, HonestAndOverflowingCounts) {
  const SubsetScenario s;
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    EXPECT_EQ(attack_blind_subset(s, rng, std::vector<unsigned>(4, 1)).outcome, TrialOutcome::kAcceptedCorrect);
    const auto r = attack_blind_subset(s, rng, std::vector<unsigned>(4, 4));
    const auto fps = r.detail.at("fingerprints").get<std::vector<std::uint64_t>>();
    const auto sum = std::accumulate(fps.begin(), fps.end(), std::uint64_t{0});
    if (4 * sum >= (std::uint64_t{1} << s.layout.m)) EXPECT_EQ(r.outcome, TrialOutcome::kNullified);
    EXPECT_TRUE(r.detected());
  }
  EXPECT_THROW(attack_blind_subset(s, rng, std::vector<unsigned>(3, 1)), Error);
  EXPECT_THROW(attack_blind_subset(s, rng, std::vector<unsigned>(4, 0)), Error);
}

TEST(Subset, RandomDeviationsAreNeverHonest) {
  const SubsetScenario s;
  std::uint64_t successes = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    auto rng = stats::trial_rng(11, t);
    const auto r = attack_blind_subset(s, rng);
    EXPECT_NE(r.detail.at("counts").get<std::vector<unsigned>>(), std::vector<unsigned>(4, 1));
    EXPECT_NE(r.outcome, TrialOutcome::kAcceptedCorrect);
    if (r.success()) ++successes;
  }
  EXPECT_LT(successes, 20U);
}

protocol::PreparedRequest logmult_request(protocol::Delegator& d) {
  protocol::WordOptions opts;
  opts.layout = {8, 8};
  opts.counter_bits = 3;
  opts.compile = logmult::CompileMode::kLogMult;
  return d.prepare_word(circuit::worked_logmult_example(), {{"x", 4}, {"y", 8}}, fp::FingerprintScheme::Complete(4),
                        opts);
}

TEST(PlanDeviation, SkippingAnyExponentiationIsRejected) {
  protocol::Delegator d;
  const auto prepared = logmult_request(d);
  const auto exps = exp_steps(prepared.request.plan);
  ASSERT_EQ(exps.size(), 2U);
  for (const auto idx : exps) {
    const auto r = attack_skip_exp(prepared, 128, idx);
    EXPECT_TRUE(r.detected()) << r.ToJson().dump();
    EXPECT_TRUE(confined(r.transcript, protocol::legal_word_ops()));
  }
  EXPECT_TRUE(attack_skip_exp(prepared, 128).detected());
  EXPECT_EQ(run_modified_plan(prepared, prepared.request.plan, 128, "honest").outcome,
            TrialOutcome::kAcceptedCorrect);
}

TEST(PlanDeviation, OmittedOrDuplicatedSourcesAreDetected) {
  protocol::Delegator d;
  const auto prepared = logmult_request(d);
  const auto& plan = prepared.request.plan;
  for (std::size_t i = 0; i < plan.sources.size(); ++i) {
    EXPECT_TRUE(run_modified_plan(prepared, omit_source(plan, i), 128, "omit").detected()) << i;
    EXPECT_TRUE(run_modified_plan(prepared, duplicate_source(plan, i), 128, "dup").detected()) << i;
  }
  EXPECT_THROW(omit_source(plan, plan.sources.size()), Error);
}

TEST(Simd, VariantsAreDetectedWithOrWithoutForgedTrace) {
  protocol::Delegator d;
  const auto c = circuit::worked_simd_polynomial();
  const auto prepared = d.prepare_simd(c, {{"x", {4.0, 0.5}}, {"y", {7.0, 2.0}}});
  const std::vector honest{199.6, 15.1};
  const auto variants = simd_variants(prepared.request.program);
  ASSERT_FALSE(variants.empty());
  for (const auto& v : variants) {
    for (const bool forge : {false, true}) {
      const auto r = attack_reorder_simd(prepared, v, forge, honest);
      EXPECT_TRUE(r.detected()) << r.ToJson().dump();
      EXPECT_TRUE(confined(r.transcript, protocol::legal_simd_ops()));
    }
  }
  EXPECT_EQ(attack_reorder_simd(prepared, prepared.request.program, false, honest).outcome,
            TrialOutcome::kAcceptedCorrect);
}

TEST(Harness, ReproducibleAndValidated) {
  const MaskingScenario s;
  const TrialFn fn = [&](std::mt19937_64& rng, std::uint64_t) { return attack_omit_and_mask(s, rng); };
  std::vector<TrialReport> a;
  std::vector<TrialReport> b;
  const auto sa = monte_carlo(fn, 300, 42, &a);
  const auto sb = monte_carlo(fn, 300, 42, &b);
  EXPECT_EQ(sa.successes, sb.successes);
  ASSERT_EQ(a.size(), 300U);
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(a[t].ToJson(), b[t].ToJson());
  EXPECT_LE(sa.ci.low, sa.success_rate);
  EXPECT_GE(sa.ci.high, sa.success_rate);
  EXPECT_THROW(monte_carlo(fn, 0, 42), Error);
}

TEST(Classify, OnlyWrongAcceptanceIsSuccess) {
  const auto layout = fp::WordLayout::Make(6, 6);
  EXPECT_EQ(classify(fp::classify(layout, layout.pack(18, 11), 11), 18), TrialOutcome::kAcceptedCorrect);
  EXPECT_EQ(classify(fp::classify(layout, layout.pack(19, 11), 11), 18), TrialOutcome::kAcceptedWrong);
  EXPECT_EQ(classify(fp::classify(layout, layout.pack(18, 12), 11), 18), TrialOutcome::kRejected);
  EXPECT_EQ(classify(fp::classify(layout, 0, 11), 18), TrialOutcome::kNullified);
}

}  // namespace
}  // namespace fpdel::adversary
