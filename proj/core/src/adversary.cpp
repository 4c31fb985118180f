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

#include "fpdel/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fpdel/blackbox_add.hpp"
#include "fpdel/error.hpp"

namespace fpdel::adversary {

std::string_view to_string(TrialOutcome o) noexcept {
  switch (o) {
    case TrialOutcome::kAcceptedWrong: return "accepted_wrong";
    case TrialOutcome::kRejected: return "rejected";
    case TrialOutcome::kNullified: return "nullified";
    case TrialOutcome::kAcceptedCorrect: return "accepted_correct";
  }
  return "unknown";
}

namespace {

TrialOutcome from_outcome(fp::Outcome o, bool value_correct) {
  switch (o) {
    case fp::Outcome::kAccepted: return value_correct ? TrialOutcome::kAcceptedCorrect : TrialOutcome::kAcceptedWrong;
    case fp::Outcome::kNullified: return TrialOutcome::kNullified;
    case fp::Outcome::kRejected: break;
  }
  return TrialOutcome::kRejected;
}

std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

// A word-mode request assembled directly from encoded words.
protocol::DelegationRequest word_request(const bb::BlackboxConfig& cfg, std::span<const fp::EncodedWord> words) {
  protocol::DelegationRequest req;
  req.mode = protocol::Mode::kWord;
  req.blackbox = cfg;
  for (const auto& w : words) req.inputs.push_back(w.ct);
  return req;
}

}  // namespace

TrialOutcome classify(const fp::Verdict& v, std::uint64_t honest_comp) {
  return from_outcome(v.outcome, v.comp_value && *v.comp_value == honest_comp);
}

TrialOutcome classify(const protocol::VerifiedResult& r, std::uint64_t honest_comp) {
  return from_outcome(r.outcome, r.comp_value && *r.comp_value == honest_comp);
}

nlohmann::json TrialReport::ToJson() const {
  return {{"strategy", strategy},
          {"scenario", scenario},
          {"outcome", std::string(to_string(outcome))},
          {"transcript", transcript},
          {"detail", detail}};
}

bool ConsistencyReport::consistent() const {
  return !runs.empty() &&
         std::all_of(runs.begin(), runs.end(), [](const LutRun& r) { return r.output == r.lut_value; });
}

nlohmann::json ConsistencyReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : runs) {
    rows.push_back({{"input", r.input}, {"key", r.key}, {"output", r.output}, {"lut", r.lut_value}, {"gates", r.gates}});
  }
  return {{"runs", rows}, {"consistent", consistent()}};
}

ConsistencyReport attack_consistent_lut(const blind::ClearLut& lut, std::span<const he::KeyPair> keys) {
  lut.validate();
  ConsistencyReport report;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const he::KeyPair& kp = keys[k];
    for (std::uint64_t p = 0; p < lut.rows.size(); ++p) {
      // Delegator side: the encrypted input bits.
      std::vector<he::Ciphertext> bits;
      for (unsigned j = 0; j < lut.input_bits; ++j) bits.push_back(kp.encrypt((p >> j) & 1U));

      // Server side: gates only.
      std::vector<std::string> gates;
      const he::Evaluator ev([&gates](const he::EvalGate& g) { gates.emplace_back(he::to_string(g.kind)); });
      const auto out = blind::blind_lut_eval(ev, bits, lut);

      std::uint64_t value = 0;
      for (std::size_t j = 0; j < out.size(); ++j) value |= (kp.decrypt(out[j]) & 1U) << j;
      report.runs.push_back({p, k, value, lut.rows[p], gates.size()});
      if (report.transcript.empty()) report.transcript = std::move(gates);
    }
  }
  return report;
}

nlohmann::json MaskingScenario::ToJson() const {
  return {{"n", layout.n}, {"m", layout.m}, {"i", inputs}, {"scheme", "binary"}, {"blackbox", "overflow_nullify"}};
}

TrialReport attack_omit_and_mask(const MaskingScenario& s, std::mt19937_64& rng) {
  const unsigned m = s.layout.m;
  if (s.inputs < 2 || s.inputs > m) throw Error(ErrorCode::kInvalidArgument, "masking needs 2..m inputs");
  std::vector<unsigned> positions(m);
  std::iota(positions.begin(), positions.end(), 0U);
  std::shuffle(positions.begin(), positions.end(), rng);
  positions.resize(s.inputs);
  const auto scheme = fp::FingerprintScheme::Binary(positions);

  const he::KeyPair kp = he::keygen(he::SlotKind::Word(s.layout.word_bits()));
  std::vector<fp::EncodedWord> words;
  std::uint64_t honest = 0;
  for (std::size_t j = 0; j < s.inputs; ++j) {
    const std::uint64_t c = uniform(rng, 0, s.comp_limit - 1);
    honest += c;
    words.push_back(fp::encode_word(kp, s.layout, c, scheme.value(j)));
  }
  const std::uint64_t expected = scheme.honest_sum();
  const auto req = word_request({s.layout, bb::BlackboxMode::kOverflowNullify, 0}, words);

  // Adversary: positions unknown. Guess a pair, a direction and a distance.
  const std::size_t a = uniform(rng, 0, s.inputs - 1);
  std::size_t b = uniform(rng, 0, s.inputs - 2);
  if (b >= a) ++b;
  const bool up = uniform(rng, 0, 1) == 1;
  const unsigned d = static_cast<unsigned>(uniform(rng, 1, m - 1));
  const std::size_t omitted = up ? a : b;
  const std::size_t masker = up ? b : a;

  protocol::WordServer server(req);
  const auto& in = server.inputs();
  fp::EncodedWord acc = in[masker];
  for (unsigned k = 0; k < d; ++k) acc = server.add(acc, acc);
  for (std::size_t j = 0; j < in.size(); ++j) {
    if (j != omitted) acc = server.add(acc, in[j]);
  }

  const auto v = fp::verify_result(kp, acc, expected);
  TrialReport r;
  r.strategy = "omit_and_mask";
  r.scenario = s.ToJson();
  r.outcome = classify(v, honest);
  r.transcript = server.transcript();
  r.detail = {{"positions", positions}, {"omitted", omitted}, {"masker", masker}, {"up", up}, {"d", d},
              {"guess_right", positions[masker] + d == positions[omitted]}};
  return r;
}

Enumeration enumerate_masking_guesses(unsigned m) {
  if (m < 2 || m > 16) throw Error(ErrorCode::kInvalidArgument, "enumeration supports 2 <= m <= 16");
  const fp::WordLayout layout{12, m};
  const bb::BlackboxConfig cfg{layout, bb::BlackboxMode::kOverflowNullify, 0};
  // Computation values chosen so that no masked sum equals the honest one.
  const std::uint64_t cx = 3;
  const std::uint64_t cy = 5;
  Enumeration e;
  for (unsigned px = 0; px < m; ++px) {
    for (unsigned py = 0; py < m; ++py) {
      if (px == py) continue;
      const std::uint64_t words[2] = {layout.pack(cx, std::uint64_t{1} << px), layout.pack(cy, std::uint64_t{1} << py)};
      const std::uint64_t expected = (std::uint64_t{1} << px) | (std::uint64_t{1} << py);
      for (int up = 0; up < 2; ++up) {
        for (unsigned d = 1; d < m; ++d) {
          const std::size_t omitted = up ? 0 : 1;
          const std::size_t masker = 1 - omitted;
          std::uint64_t acc = words[masker];
          for (unsigned k = 0; k < d; ++k) acc = bb::reference_add(cfg, acc, acc);
          acc = bb::reference_add(cfg, acc, words[masker]);
          const auto v = fp::classify(layout, acc, expected);
          ++e.cases;
          if (classify(v, cx + cy) == TrialOutcome::kAcceptedWrong) ++e.successes;
        }
      }
    }
  }
  return e;
}

nlohmann::json OverflowScenario::ToJson() const {
  return {{"n", layout.n}, {"m", layout.m}, {"i", 2}, {"scheme", "complete"},
          {"blackbox", defended ? "carry_nullify" : "unguarded"}};
}

TrialReport attack_overflow_clear(const OverflowScenario& s, std::uint64_t reps, std::mt19937_64& rng) {
  if (reps == 0) throw Error(ErrorCode::kInvalidArgument, "reps must be >= 1");
  const std::uint64_t limit = std::max<std::uint64_t>(1, s.layout.comp_limit() / (2 * (reps + 1)));
  const std::uint64_t cx = uniform(rng, 0, limit - 1);
  const std::uint64_t cy = uniform(rng, 0, limit - 1);
  // p = 2^(n+m): a plain sum wraps like the hardware word it models.
  const he::KeyPair kp = he::keygen(he::SlotKind::Word(s.layout.word_bits()));
  const std::vector<fp::EncodedWord> words{fp::encode_word(kp, s.layout, cx, 1), fp::encode_word(kp, s.layout, cy, 2)};
  const bb::BlackboxConfig cfg = s.defended ? bb::BlackboxConfig::CompleteBinary(s.layout) : bb::BlackboxConfig::Unguarded(s.layout);
  const auto req = word_request(cfg, words);

  protocol::WordServer server(req);
  std::vector<fp::EncodedWord> chain(reps, server.inputs()[0]);
  chain.push_back(server.inputs()[1]);
  const auto result = server.add_chain(chain);

  const auto v = fp::verify_result(kp, result, 3);
  TrialReport r;
  r.strategy = "overflow_clear";
  r.scenario = s.ToJson();
  r.scenario["reps"] = reps;
  r.outcome = classify(v, cx + cy);
  r.transcript = server.transcript();
  r.detail = {{"plaintext", v.plaintext}, {"fp", v.observed_fp}, {"honest", cx + cy}};
  return r;
}

nlohmann::json SubsetScenario::ToJson() const {
  return {{"n", layout.n}, {"m", layout.m}, {"i", inputs}, {"bound", bound}, {"scheme", "integer"},
          {"blackbox", "overflow_nullify"}};
}

TrialReport attack_blind_subset(const SubsetScenario& s, std::mt19937_64& rng,
                                std::optional<std::vector<unsigned>> counts) {
  const he::KeyPair kp = he::keygen(he::SlotKind::Word(s.layout.word_bits()));
  const auto scheme = fp::sample_integer_fingerprints(rng, s.inputs, s.layout.m);
  std::vector<fp::EncodedWord> words;
  std::uint64_t honest = 0;
  for (std::size_t j = 0; j < s.inputs; ++j) {
    const std::uint64_t c = uniform(rng, 0, s.comp_limit - 1);
    honest += c;
    words.push_back(fp::encode_word(kp, s.layout, c, scheme.value(j)));
  }
  const auto req = word_request(bb::BlackboxConfig::IntegerFp(s.layout), words);

  std::vector<unsigned> c;
  if (counts) {
    c = *counts;
    if (c.size() != s.inputs) throw Error(ErrorCode::kInvalidArgument, "one count per input expected");
  } else {
    // Any multiset except the honest one; the empty sum is not an answer.
    const auto honest_counts = std::vector<unsigned>(s.inputs, 1U);
    do {
      c.assign(s.inputs, 0);
      for (auto& k : c) k = static_cast<unsigned>(uniform(rng, 0, s.bound));
    } while (c == honest_counts || std::all_of(c.begin(), c.end(), [](unsigned k) { return k == 0; }));
  }

  protocol::WordServer server(req);
  std::vector<fp::EncodedWord> chain;
  for (std::size_t j = 0; j < s.inputs; ++j) chain.insert(chain.end(), c[j], server.inputs()[j]);
  if (chain.empty()) throw Error(ErrorCode::kInvalidArgument, "empty multiset");
  const auto result = chain.size() == 1 ? chain.front() : server.add_chain(chain);

  const auto v = fp::verify_result(kp, result, scheme.honest_sum());
  TrialReport r;
  r.strategy = "blind_subset_sum";
  r.scenario = s.ToJson();
  r.outcome = classify(v, honest);
  r.transcript = server.transcript();
  r.detail = {{"counts", c}, {"fingerprints", scheme.values()}};
  return r;
}

logmult::ExecutionPlan omit_source(const logmult::ExecutionPlan& plan, std::size_t index) {
  using logmult::Ref;
  using logmult::StepKind;
  if (index >= plan.sources.size()) throw Error(ErrorCode::kOutOfRange, "no such source");
  logmult::ExecutionPlan out = plan;
  out.steps.clear();
  std::vector<std::optional<Ref>> map(plan.steps.size());
  auto resolve = [&](const Ref& r) -> std::optional<Ref> {
    if (r.kind == Ref::Kind::kSource) return r.index == index ? std::nullopt : std::optional<Ref>(r);
    return map[r.index];
  };
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    logmult::Step s = plan.steps[i];
    const auto a = resolve(s.lhs);
    if (s.kind == StepKind::kAdd || s.kind == StepKind::kAddConst) {
      const auto b = resolve(s.rhs);
      if (a && b) {
        s.lhs = *a;
        s.rhs = *b;
      } else {
        map[i] = a ? a : b;
        continue;
      }
    } else if (a) {
      s.lhs = *a;
    } else {
      continue;
    }
    out.steps.push_back(s);
    map[i] = Ref::Step(out.steps.size() - 1);
  }
  const std::optional<Ref> final_ref = plan.steps.empty() ? resolve(Ref::Src(0)) : map.back();
  if (!final_ref) throw Error(ErrorCode::kUnsupported, "omitting this source leaves nothing to return");
  if (!(*final_ref == out.output())) {
    // Return the surviving value through an identity scaling.
    out.steps.push_back({StepKind::kScale, *final_ref, {}, 1});
  }
  return out;
}

logmult::ExecutionPlan duplicate_source(const logmult::ExecutionPlan& plan, std::size_t index) {
  using logmult::Ref;
  using logmult::StepKind;
  if (index >= plan.sources.size()) throw Error(ErrorCode::kOutOfRange, "no such source");
  const bool is_const = plan.sources[index].kind == logmult::SourceKind::kConst;
  const StepKind add = is_const ? StepKind::kAddConst : StepKind::kAdd;
  logmult::ExecutionPlan out = plan;
  const Ref src = Ref::Src(index);
  auto uses = [&](const logmult::Step& s) {
    const bool binary = s.kind == StepKind::kAdd || s.kind == StepKind::kAddConst;
    return s.lhs == src || (binary && s.rhs == src);
  };
  const auto it = std::find_if(plan.steps.begin(), plan.steps.end(), uses);
  if (it == plan.steps.end()) {
    out.steps.push_back({add, src, src, 0});
    return out;
  }
  const std::size_t k = static_cast<std::size_t>(it - plan.steps.begin());
  out.steps.insert(out.steps.begin() + static_cast<std::ptrdiff_t>(k) + 1, {add, Ref::Step(k), src, 0});
  for (std::size_t i = k + 2; i < out.steps.size(); ++i) {
    for (Ref* r : {&out.steps[i].lhs, &out.steps[i].rhs}) {
      if (r->kind == Ref::Kind::kStep && r->index >= k) ++r->index;
    }
  }
  return out;
}

std::vector<std::size_t> exp_steps(const logmult::ExecutionPlan& plan) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (plan.steps[i].kind == logmult::StepKind::kExp) out.push_back(i);
  }
  return out;
}

TrialReport run_modified_plan(const protocol::PreparedRequest& prepared, const logmult::ExecutionPlan& executed,
                              std::uint64_t honest_comp, std::string strategy) {
  protocol::WordServer server(prepared.request);
  const auto result = server.execute(executed);
  const auto vr = protocol::verify_response(prepared.context, {result.ct, std::nullopt, server.transcript()});
  TrialReport r;
  r.strategy = std::move(strategy);
  r.scenario = {{"n", prepared.context.layout.n}, {"m", prepared.context.layout.m},
                {"i", prepared.request.plan.sources.size()}, {"mode", std::string(protocol::to_string(prepared.context.mode))}};
  r.outcome = classify(vr, honest_comp);
  r.transcript = server.transcript();
  r.detail = vr.ToJson();
  return r;
}

TrialReport attack_skip_exp(const protocol::PreparedRequest& prepared, std::uint64_t honest_comp,
                            std::optional<std::size_t> exp_index) {
  const auto& plan = prepared.request.plan;
  const auto exps = exp_steps(plan);
  if (exps.empty()) throw Error(ErrorCode::kInvalidArgument, "plan has no exponentiation step");
  const std::size_t idx = exp_index.value_or(exps.back());
  if (idx >= plan.steps.size() || plan.steps[idx].kind != logmult::StepKind::kExp) {
    throw Error(ErrorCode::kInvalidArgument, "step " + std::to_string(idx) + " is not an exponentiation");
  }
  auto r = run_modified_plan(prepared, plan.without_step(idx), honest_comp, "skip_exp");
  r.detail["skipped_step"] = idx;
  return r;
}

std::vector<simd::SimdProgram> simd_variants(const simd::SimdProgram& p) {
  using simd::OpKind;
  using simd::Operand;
  std::vector<simd::SimdProgram> out;
  auto keep = [&](simd::SimdProgram v) {
    if (v == p) return;
    if (std::find(out.begin(), out.end(), v) != out.end()) return;
    v.validate();
    out.push_back(std::move(v));
  };
  // One extra multiplication after the last step.
  const Operand last = p.output();
  {
    auto v = p;
    v.steps.push_back({OpKind::kMul, last, last});
    keep(v);
  }
  for (std::size_t k = 0; k < p.num_inputs; ++k) {
    auto v = p;
    v.steps.push_back({OpKind::kMul, last, Operand::Input(k)});
    keep(v);
  }
  for (std::size_t k = 0; k < p.num_consts; ++k) {
    auto v = p;
    v.steps.push_back({OpKind::kMulConst, last, Operand::Const(k)});
    keep(v);
  }
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    // Addition and multiplication swapped.
    auto v = p;
    switch (v.steps[i].op) {
      case OpKind::kAdd: v.steps[i].op = OpKind::kMul; break;
      case OpKind::kMul: v.steps[i].op = OpKind::kAdd; break;
      case OpKind::kAddConst: v.steps[i].op = OpKind::kMulConst; break;
      case OpKind::kMulConst: v.steps[i].op = OpKind::kAddConst; break;
      default: break;
    }
    keep(v);
    // Operands rewired to another input or constant.
    for (int side = 0; side < 2; ++side) {
      const Operand o = side == 0 ? p.steps[i].lhs : p.steps[i].rhs;
      const std::size_t pool = o.kind == Operand::Kind::kInput   ? p.num_inputs
                               : o.kind == Operand::Kind::kConst ? p.num_consts
                                                                 : 0;
      for (std::size_t k = 0; k < pool; ++k) {
        if (k == o.index) continue;
        auto w = p;
        (side == 0 ? w.steps[i].lhs : w.steps[i].rhs).index = k;
        keep(w);
      }
    }
  }
  return out;
}

TrialReport attack_reorder_simd(const protocol::PreparedRequest& prepared, const simd::SimdProgram& executed,
                                bool forge_trace, std::span<const double> honest_comp) {
  TrialReport r;
  r.strategy = forge_trace ? "reorder_simd_forged_trace" : "reorder_simd";
  r.scenario = {{"slots", prepared.request.slot_count}, {"steps", executed.steps.size()}};
  protocol::SimdServer server(prepared.request);
  simd::Execution exec;
  try {
    exec = server.run(executed);
  } catch (const Error& e) {
    // The deviation could not even run (depth budget, say).
    r.outcome = TrialOutcome::kRejected;
    r.detail = {{"error", e.what()}};
    return r;
  }
  protocol::DelegationResponse resp{exec.result.ct,
                                    forge_trace ? simd::TraceCircuit{prepared.request.program.steps} : exec.trace,
                                    server.transcript()};
  const auto vr = protocol::verify_response(prepared.context, resp);
  bool correct = vr.comp_slots.size() == honest_comp.size();
  for (std::size_t k = 0; correct && k < honest_comp.size(); ++k) {
    correct = std::fabs(vr.comp_slots[k] - honest_comp[k]) <= 1e-6 * std::max(1.0, std::fabs(honest_comp[k]));
  }
  r.outcome = from_outcome(vr.outcome, correct);
  r.transcript = server.transcript();
  r.detail = vr.ToJson();
  return r;
}

stats::DetectionStats monte_carlo(const TrialFn& fn, std::uint64_t trials, std::uint64_t seed,
                                  std::vector<TrialReport>* reports) {
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "monte_carlo needs at least one trial");
  std::uint64_t successes = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto rng = stats::trial_rng(seed, t);
    TrialReport r = fn(rng, t);
    if (r.success()) ++successes;
    if (reports) reports->push_back(std::move(r));
  }
  return stats::DetectionStats::From(successes, trials);
}

}  // namespace fpdel::adversary
