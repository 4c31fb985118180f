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

#include <array>
#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fpdel/adversary.hpp"
#include "fpdel/blackbox_add.hpp"
#include "fpdel/blind_ops.hpp"
#include "fpdel/circuit.hpp"
#include "fpdel/error.hpp"
#include "fpdel/fingerprint.hpp"
#include "fpdel/log_mult.hpp"
#include "fpdel/protocol.hpp"
#include "fpdel/simd_fp.hpp"

namespace fpdel::cli {
namespace {

using nlohmann::json;

std::string bits(std::uint64_t v, unsigned width) {
  std::string s(width, '0');
  for (unsigned j = 0; j < width; ++j) {
    if ((v >> j) & 1U) s[width - 1 - j] = '1';
  }
  return s;
}

std::string split_bits(const fp::WordLayout& layout, std::uint64_t word) {
  return bits(layout.comp_of(word), layout.n) + " " + bits(layout.fp_of(word), layout.m);
}

CommandResult demo_lut_attack() {
  const auto lut = blind::ClearLut::AlternatingParity(3);
  const std::array keys{he::keygen(he::SlotKind::Bit()), he::keygen(he::SlotKind::Bit())};
  const auto report = adversary::attack_consistent_lut(lut, keys);

  // Rows: one per input, one column per key.
  json table = json::array();
  for (std::uint64_t p = 0; p < lut.rows.size(); ++p) {
    json outs = json::array();
    for (const auto& r : report.runs) {
      if (r.input == p) outs.push_back(r.output);
    }
    table.push_back({{"input", bits(p, 3)}, {"lut", lut.rows[p]}, {"outputs", outs}});
  }
  json j{{"demo", "lut-attack"},
         {"keys", keys.size()},
         {"runs", report.runs.size()},
         {"table", table},
         {"consistent", report.consistent()},
         {"gates_per_run", report.runs.empty() ? 0 : report.runs.front().gates}};
  return {report.consistent() ? kExitOk : kExitRejected, j};
}

CommandResult demo_add_fingerprint() {
  const auto layout = fp::WordLayout::Make(3, 4);
  const auto scheme = fp::FingerprintScheme::Binary({1, 2});
  const auto cfg = bb::BlackboxConfig::ForScheme(layout, scheme);
  const auto kp = he::keygen(he::SlotKind::Word(layout.word_bits()));

  const auto a = fp::encode_word(kp, layout, 0b001, 0b0010);
  const auto b = fp::encode_word(kp, layout, 0b110, 0b0100);
  const auto sum = bb::bb_add(cfg, a, b);
  const auto v = fp::verify_result(kp, sum, scheme.honest_sum());

  json j{{"demo", "add-fingerprint"},
         {"blackbox", std::string(bb::to_string(cfg.mode))},
         {"a", "0b" + bits(kp.decrypt(a.ct), layout.word_bits())},
         {"b", "0b" + bits(kp.decrypt(b.ct), layout.word_bits())},
         {"sum", "0b" + bits(v.plaintext, layout.word_bits())},
         {"expected_fp", "0b" + bits(scheme.honest_sum(), layout.m)},
         {"verdict", std::string(fp::to_string(v.outcome))}};
  if (v.comp_value) j["comp"] = "0b" + bits(*v.comp_value, layout.n);
  return {v.accepted() ? kExitOk : kExitRejected, j};
}

CommandResult demo_logmult_trace() {
  const auto layout = fp::WordLayout::Make(8, 8);
  const auto c = circuit::worked_logmult_example();
  protocol::WordOptions opts;
  opts.layout = layout;
  opts.counter_bits = 3;
  opts.compile = logmult::CompileMode::kLogMult;

  protocol::Delegator delegator;
  const auto prepared =
      delegator.prepare_word(c, {{"x", 4}, {"y", 8}}, fp::FingerprintScheme::Complete(4), opts);
  protocol::WordServer server(prepared.request);
  std::vector<fp::EncodedWord> words;
  const auto result = server.execute(prepared.request.plan, &words);
  const auto vr = protocol::verify_response(prepared.context, {result.ct, std::nullopt, server.transcript()});

  // Decrypting intermediates is a demo-only view of what the server holds.
  const he::KeyPair& kp = prepared.context.kp;
  json steps = json::array();
  json trace = json::array();
  bool after_lut = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto kind = prepared.request.plan.steps[i].kind;
    const std::string word = split_bits(layout, kp.decrypt(words[i].ct));
    steps.push_back({{"op", std::string(logmult::to_string(kind))}, {"word", word}});
    after_lut = after_lut || kind == logmult::StepKind::kExp || kind == logmult::StepKind::kLog;
    if (after_lut) trace.push_back(word);
  }
  json j = vr.ToJson();
  j["demo"] = "logmult-trace";
  j["steps"] = steps;
  j["trace"] = trace;
  j["expected_fp"] = bits(prepared.context.expected_fp, layout.m);
  return {vr.accepted() ? kExitOk : kExitRejected, j};
}

CommandResult demo_seal_example() {
  const auto layout = fp::WordLayout::Make(6, 6);
  const auto c = circuit::worked_linear_example();
  const auto plan = logmult::compile_circuit(c, logmult::CompileMode::kWord, 0);
  const auto scheme = logmult::scheme_from_annotations(plan);
  const auto kp = he::keygen(he::SlotKind::Word(layout.word_bits()));

  const auto [req, expected] = protocol::prepare_request(c, {{"x", 4}, {"y", 7}}, scheme, layout, kp);
  const auto resp = protocol::serve_honest(req);
  const auto v = fp::verify_result(kp, {layout, resp.result}, expected);

  json inputs = json::array();
  for (const auto& ct : req.inputs) inputs.push_back(kp.decrypt(ct));
  json j{{"demo", "seal-example"},
         {"inputs", inputs},
         {"result", v.plaintext},
         {"fp", v.observed_fp},
         {"expected_fp", expected},
         {"verdict", std::string(fp::to_string(v.outcome))},
         {"transcript", resp.transcript}};
  if (v.comp_value) j["comp"] = *v.comp_value;
  return {v.accepted() ? kExitOk : kExitRejected, j};
}

CommandResult demo_simd_poly() {
  const auto c = circuit::worked_simd_polynomial();
  const std::map<std::string, std::vector<double>> inputs{{"x", {4.0, 0.5}}, {"y", {7.0, 2.0}}};
  protocol::Delegator delegator;
  const auto prepared = delegator.prepare_simd(c, inputs);
  const auto vr = protocol::verify_response(prepared.context, protocol::serve_honest(prepared.request));

  std::vector<double> honest;
  for (std::size_t k = 0; k < 2; ++k) {
    honest.push_back(c.evaluate({{"x", inputs.at("x")[k]}, {"y", inputs.at("y")[k]}}));
  }

  std::size_t variants = 0;
  std::size_t detected = 0;
  for (const auto& v : adversary::simd_variants(prepared.request.program)) {
    for (bool forge : {false, true}) {
      ++variants;
      if (!adversary::attack_reorder_simd(prepared, v, forge, honest).success()) ++detected;
    }
  }

  json j = vr.ToJson();
  j["demo"] = "simd-poly";
  j["expected"] = honest;
  j["expected_fp"] = prepared.context.expected_simd_fp;
  j["deviations"] = variants;
  j["deviations_detected"] = detected;
  return {vr.accepted() && detected == variants ? kExitOk : kExitRejected, j};
}

CommandResult demo_float_hazard() {
  using simd::OpKind;
  using simd::Operand;
  // (x + 1e13) - 1e13 with the constants' fp stand-ins cancelling.
  simd::SimdProgram p{1, 2,
                      {{OpKind::kAddConst, Operand::Input(0), Operand::Const(0)},
                       {OpKind::kSub, Operand::Step(0), Operand::Const(1)}}};
  const std::vector<simd::SimdConst> consts{{1e13, 4.0}, {1e13, 4.0}};
  const std::vector<double> const_fps{4.0, 4.0};
  const auto findings = simd::lint_program(p, const_fps, 4);

  const simd::SimdLayout layout{3, 2};
  const auto kp = he::keygen(he::SlotKind::Simd(layout.slot_count, 4));
  const std::vector<double> x{0.0001, 0.0001};
  const std::vector<simd::SimdVector> in{simd::encode_simd(kp, x, 7.0, layout.fp_slot)};
  const std::vector<simd::SimdVector> cv{simd::encode_const(kp, layout, consts[0]),
                                         simd::encode_const(kp, layout, consts[1])};
  const auto exec = simd::simd_execute(p, in, cv, {}, {.skip_lint = true});
  const auto slots = kp.decrypt_slots(exec.result.ct);

  json lint = json::array();
  for (const auto& f : findings) lint.push_back({{"code", std::string(simd::to_string(f.code))}, {"message", f.message}});
  json j{{"demo", "float-hazard"},
         {"lint", lint},
         {"lint_rejected", !findings.empty()},
         {"fp_slot", slots.at(layout.fp_slot)},
         {"expected_fp", 7.0},
         {"comp", simd::comp_slots(layout, slots)},
         {"intended", x}};
  return {kExitOk, j};
}

}  // namespace

const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names{"lut-attack",   "add-fingerprint", "logmult-trace",
                                              "seal-example", "simd-poly",       "float-hazard"};
  return names;
}

CommandResult cmd_demo(std::string_view name) {
  if (name == "lut-attack") return demo_lut_attack();
  if (name == "add-fingerprint") return demo_add_fingerprint();
  if (name == "logmult-trace") return demo_logmult_trace();
  if (name == "seal-example") return demo_seal_example();
  if (name == "simd-poly") return demo_simd_poly();
  if (name == "float-hazard") return demo_float_hazard();
  throw Error(ErrorCode::kInvalidArgument, "unknown demo '" + std::string(name) + "'");
}

}  // namespace fpdel::cli
