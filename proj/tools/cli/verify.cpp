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

#include <bit>
#include <charconv>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fpdel/adversary.hpp"
#include "fpdel/envelope.hpp"
#include "fpdel/error.hpp"
#include "fpdel/log_mult.hpp"
#include "fpdel/protocol.hpp"
#include "fpdel/simd_fp.hpp"

namespace fpdel::cli {
namespace {

using nlohmann::json;

double parse_double(std::string_view text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(text), &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParse, "not a number: '" + std::string(text) + "'");
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParse, "not an unsigned integer: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_double(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::map<std::string, std::uint64_t> word_inputs(const VerifyOptions& o) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [k, v] : o.inputs) out[k] = parse_u64(v);
  return out;
}

std::map<std::string, std::vector<double>> simd_inputs(const VerifyOptions& o) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [k, v] : o.inputs) out[k] = parse_list(v);
  return out;
}

protocol::WordOptions word_options(const circuit::Circuit& c, const VerifyOptions& o) {
  protocol::WordOptions w;
  w.layout = o.layout;
  if (o.counter_bits) {
    w.counter_bits = *o.counter_bits;
  } else {
    // Provisional width; only the mode and the LUT step count are read.
    const auto plan = logmult::compile_circuit(c, logmult::CompileMode::kAuto, 1);
    if (plan.mode == logmult::PlanMode::kLogMult) {
      w.counter_bits = static_cast<unsigned>(std::bit_width(plan.lut_steps())) + 1;
    }
  }
  return w;
}

protocol::SimdOptions simd_options(const VerifyOptions& o) {
  return {o.slot_count, o.fp_slot, o.depth_budget};
}

std::size_t source_named(const logmult::ExecutionPlan& plan, std::string_view name) {
  for (std::size_t i = 0; i < plan.sources.size(); ++i) {
    const auto& s = plan.sources[i];
    if (s.kind == logmult::SourceKind::kInput && s.name == name) return i;
  }
  throw Error(ErrorCode::kInvalidArgument, "no input source named '" + std::string(name) + "'");
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

CommandResult finish(json report, fp::Outcome outcome) {
  return {outcome == fp::Outcome::kAccepted ? kExitOk : kExitRejected, std::move(report)};
}

CommandResult verify_word(const circuit::Circuit& c, const VerifyOptions& o) {
  protocol::Delegator delegator;
  const auto inputs = word_inputs(o);
  const auto prepared = delegator.prepare_word(c, inputs, std::nullopt, word_options(c, o));
  const auto& plan = prepared.request.plan;
  const std::uint64_t honest = logmult::evaluate_plan(plan, logmult::source_values(plan, inputs));

  json report;
  if (!o.malicious) {
    const auto resp = protocol::serve_honest(prepared.request);
    const auto vr = protocol::verify_response(prepared.context, resp);
    report = vr.ToJson();
    report["transcript"] = resp.transcript;
    report["mode"] = std::string(protocol::to_string(prepared.context.mode));
    return finish(report, vr.outcome);
  }

  const std::string& m = *o.malicious;
  adversary::TrialReport r;
  if (starts_with(m, "omit-")) {
    r = adversary::run_modified_plan(prepared, adversary::omit_source(plan, source_named(plan, m.substr(5))),
                                     honest, m);
  } else if (starts_with(m, "duplicate-")) {
    r = adversary::run_modified_plan(prepared, adversary::duplicate_source(plan, source_named(plan, m.substr(10))),
                                     honest, m);
  } else if (m == "skip-exp") {
    r = adversary::attack_skip_exp(prepared, honest);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown word strategy '" + m + "'");
  }
  report = r.detail;
  report["strategy"] = r.strategy;
  report["outcome"] = std::string(adversary::to_string(r.outcome));
  report["transcript"] = r.transcript;
  const bool accepted =
      r.outcome == adversary::TrialOutcome::kAcceptedWrong || r.outcome == adversary::TrialOutcome::kAcceptedCorrect;
  return finish(report, accepted ? fp::Outcome::kAccepted : fp::Outcome::kRejected);
}

CommandResult verify_simd(const circuit::Circuit& c, const VerifyOptions& o) {
  protocol::Delegator delegator;
  const auto inputs = simd_inputs(o);
  const auto prepared = delegator.prepare_simd(c, inputs, {}, simd_options(o));

  if (!o.malicious) {
    const auto resp = protocol::serve_honest(prepared.request);
    const auto vr = protocol::verify_response(prepared.context, resp);
    json report = vr.ToJson();
    report["transcript"] = resp.transcript;
    report["mode"] = "simd";
    return finish(report, vr.outcome);
  }

  // reorder[-k] or forge[-k]: run variant k, honestly traced or with the
  // honest program's trace.
  const std::string& m = *o.malicious;
  const bool forge = starts_with(m, "forge");
  if (!forge && !starts_with(m, "reorder")) throw Error(ErrorCode::kInvalidArgument, "unknown SIMD strategy '" + m + "'");
  const auto dash = m.find('-');
  const std::size_t k = dash == std::string::npos ? 0 : parse_u64(std::string_view(m).substr(dash + 1));
  const auto variants = adversary::simd_variants(prepared.request.program);
  if (k >= variants.size()) throw Error(ErrorCode::kInvalidArgument, "variant index out of range");

  const std::size_t lanes = o.slot_count - 1;
  std::vector<double> honest(lanes);
  for (std::size_t s = 0; s < lanes; ++s) {
    std::map<std::string, double> at;
    for (const auto& [name, vals] : inputs) at[name] = s < vals.size() ? vals[s] : 0.0;
    honest[s] = c.evaluate(at);
  }
  const auto r = adversary::attack_reorder_simd(prepared, variants[k], forge, honest);
  json report = r.detail;
  report["strategy"] = r.strategy;
  report["outcome"] = std::string(adversary::to_string(r.outcome));
  report["transcript"] = r.transcript;
  const bool accepted =
      r.outcome == adversary::TrialOutcome::kAcceptedWrong || r.outcome == adversary::TrialOutcome::kAcceptedCorrect;
  return finish(report, accepted ? fp::Outcome::kAccepted : fp::Outcome::kRejected);
}

}  // namespace

CommandResult cmd_verify(const circuit::Circuit& c, const VerifyOptions& opts) {
  c.validate();
  return c.simd ? verify_simd(c, opts) : verify_word(c, opts);
}

Delegation cmd_delegate(const circuit::Circuit& c, const VerifyOptions& opts) {
  c.validate();
  protocol::Delegator delegator;
  const auto prepared = c.simd ? delegator.prepare_simd(c, simd_inputs(opts), {}, simd_options(opts))
                               : delegator.prepare_word(c, word_inputs(opts), std::nullopt, word_options(c, opts));
  return {protocol::request_to_json(prepared.request), prepared.context.ToJson()};
}

json cmd_serve(const json& request) {
  return protocol::response_to_json(protocol::serve_honest(protocol::request_from_json(request)));
}

CommandResult cmd_check(const json& context, const json& response) {
  const auto ctx = protocol::DelegatorContext::FromJson(context);
  const auto vr = protocol::verify_response(ctx, protocol::response_from_json(response));
  return finish(vr.ToJson(), vr.outcome);
}

}  // namespace fpdel::cli
