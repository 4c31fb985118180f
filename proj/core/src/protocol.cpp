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

#include "fpdel/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fpdel/error.hpp"

namespace fpdel::protocol {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::kWord: return "word";
    case Mode::kLogMult: return "logmult";
    case Mode::kSimd: return "simd";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::kWord, Mode::kLogMult, Mode::kSimd}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorCode::kParse, "unknown mode '" + std::string(text) + "'");
}

nlohmann::json DelegatorContext::ToJson() const {
  return {{"mode", std::string(to_string(mode))},
          {"secret", nlohmann::json::parse(kp.export_secret())},
          {"n", layout.n},
          {"m", layout.m},
          {"expected_fp", expected_fp},
          {"slot_count", simd_layout.slot_count},
          {"fp_slot", simd_layout.fp_slot},
          {"expected_simd_fp", expected_simd_fp},
          {"program", program.ToJson()},
          {"zero_result_possible", zero_result_possible}};
}

DelegatorContext DelegatorContext::FromJson(const nlohmann::json& j) {
  try {
    DelegatorContext c;
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.kp = he::KeyPair::import_secret(j.at("secret").dump());
    c.layout = {j.at("n").get<unsigned>(), j.at("m").get<unsigned>()};
    c.expected_fp = j.at("expected_fp").get<std::uint64_t>();
    c.simd_layout = {j.at("slot_count").get<std::size_t>(), j.at("fp_slot").get<std::size_t>()};
    c.expected_simd_fp = j.at("expected_simd_fp").get<double>();
    if (c.mode == Mode::kSimd) c.program = simd::SimdProgram::FromJson(j.at("program"));
    c.zero_result_possible = j.value("zero_result_possible", false);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("delegator context: ") + e.what());
  }
}

nlohmann::json VerifiedResult::ToJson() const {
  nlohmann::json j{{"verdict", std::string(fp::to_string(outcome))}, {"observed_fp", observed_fp}};
  if (comp_value) j["value"] = *comp_value;
  if (!comp_slots.empty()) j["values"] = comp_slots;
  if (plaintext != 0 || outcome == fp::Outcome::kNullified) j["result"] = plaintext;
  if (escalate) j["escalate"] = true;
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

namespace {

std::string cache_key(const circuit::Circuit& c, const std::optional<fp::FingerprintScheme>& scheme,
                      const WordOptions& o) {
  return c.ToJson().dump() + "|" + (scheme ? scheme->ToJson().dump() : "annotated") + "|" +
         std::to_string(o.layout.n) + "," + std::to_string(o.layout.m) + "," + std::to_string(o.counter_bits) +
         "," + std::to_string(static_cast<int>(o.compile));
}

PreparedRequest build_word_request(const CachedFingerprint& cached,
                                   const std::map<std::string, std::uint64_t>& inputs, const he::KeyPair& kp,
                                   const WordOptions& opts) {
  const auto& plan = cached.compiled.plan;
  const auto& layout = opts.layout;
  const auto values = logmult::source_values(plan, inputs);

  PreparedRequest out;
  DelegationRequest& req = out.request;
  req.mode = plan.mode == logmult::PlanMode::kLogMult ? Mode::kLogMult : Mode::kWord;
  req.plan = plan;
  req.blackbox = bb::BlackboxConfig::ForScheme(layout, cached.scheme, plan.counter_bits);
  if (opts.blackbox_mode) req.blackbox.mode = *opts.blackbox_mode;
  req.inputs.reserve(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    // Constants go out in the combined form comp * 2^m + fp.
    req.inputs.push_back(fp::encode_word(kp, layout, values[j], cached.compiled.source_fp[j]).ct);
  }
  if (plan.mode == logmult::PlanMode::kLogMult) {
    const auto split = logmult::FpSplit::Make(layout, plan.counter_bits);
    auto luts = opts.open_luts ? logmult::build_luts(kp, layout, split)
                               : logmult::build_luts(kp, layout, split, plan, cached.compiled.source_fp);
    req.exp_lut = std::move(luts.exp);
    req.log_lut = std::move(luts.log);
  }

  DelegatorContext& ctx = out.context;
  ctx.kp = kp;
  ctx.mode = req.mode;
  ctx.layout = layout;
  ctx.expected_fp = cached.compiled.expected_fp;
  ctx.zero_result_possible =
      std::any_of(inputs.begin(), inputs.end(), [](const auto& kv) { return kv.second == 0; });
  return out;
}

}  // namespace

const CachedFingerprint& FingerprintCache::get(const circuit::Circuit& c,
                                               const std::optional<fp::FingerprintScheme>& scheme,
                                               const WordOptions& opts) {
  const std::string key = cache_key(c, scheme, opts);
  std::lock_guard lock(mu_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  opts.layout.validate();
  const auto plan = logmult::compile_circuit(c, opts.compile, opts.counter_bits);
  const auto split = logmult::FpSplit::Make(opts.layout, opts.counter_bits);
  const bool annotated = std::all_of(plan.sources.begin(), plan.sources.end(),
                                     [](const logmult::Source& s) { return s.fp_hint.has_value(); });
  if (scheme || annotated || !logmult::plan_scales(plan)) {
    CachedFingerprint entry{{}, scheme ? *scheme : logmult::scheme_from_annotations(plan)};
    entry.compiled = logmult::compile_circuit(c, entry.scheme, opts.layout, split, opts.compile);
    return entries_.emplace(key, std::move(entry)).first->second;
  }
  // Unannotated plan with scaling: draw integer fingerprints until the
  // honest trace fits the section.
  std::mt19937_64 rng(std::random_device{}());
  for (int attempt = 0; attempt < 256; ++attempt) {
    CachedFingerprint entry{
        {}, fp::sample_integer_fingerprints(rng, plan.sources.size(), opts.layout.m - opts.counter_bits)};
    try {
      entry.compiled = logmult::compile_circuit(c, entry.scheme, opts.layout, split, opts.compile);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOutOfRange) throw;
      continue;
    }
    return entries_.emplace(key, std::move(entry)).first->second;
  }
  throw Error(ErrorCode::kOutOfRange, "no integer fingerprints fit the " + std::to_string(opts.layout.m) +
                                          "-bit section for this circuit");
}

std::size_t FingerprintCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t FingerprintCache::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

PreparedRequest Delegator::prepare_word(const circuit::Circuit& c,
                                        const std::map<std::string, std::uint64_t>& inputs,
                                        const std::optional<fp::FingerprintScheme>& scheme,
                                        const WordOptions& opts) {
  const CachedFingerprint& cached = cache_.get(c, scheme, opts);
  const he::KeyPair kp = he::keygen(he::SlotKind::Word(opts.layout.word_bits()));
  return build_word_request(cached, inputs, kp, opts);
}

PreparedRequest Delegator::prepare_simd(const circuit::Circuit& c,
                                        const std::map<std::string, std::vector<double>>& inputs,
                                        const std::map<std::string, double>& fps, const SimdOptions& opts) {
  const simd::CompiledSimd compiled = simd::compile_simd(c);
  const simd::SimdLayout layout{opts.slot_count, opts.fp_slot};
  layout.validate();

  std::vector<double> const_fps;
  for (const auto& k : compiled.consts) const_fps.push_back(k.fp);
  if (const auto findings = simd::lint_program(compiled.program, const_fps, opts.depth_budget);
      !findings.empty()) {
    throw Error(ErrorCode::kUnsupported, "SIMD program rejected: " + findings.front().message);
  }

  const he::KeyPair kp = he::keygen(he::SlotKind::Simd(opts.slot_count, opts.depth_budget));
  PreparedRequest out;
  DelegationRequest& req = out.request;
  req.mode = Mode::kSimd;
  req.program = compiled.program;
  req.slot_count = opts.slot_count;

  std::vector<double> input_fps;
  bool zero = false;
  for (const auto& name : compiled.input_names) {
    const auto it = inputs.find(name);
    if (it == inputs.end()) throw Error(ErrorCode::kInvalidArgument, "no values for input '" + name + "'");
    double fpv = 0;
    if (auto f = fps.find(name); f != fps.end()) {
      fpv = f->second;
    } else if (const auto* decl = c.find_input(name); decl && decl->fp) {
      fpv = *decl->fp;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "no fingerprint for input '" + name + "'");
    }
    input_fps.push_back(fpv);
    zero = zero || std::any_of(it->second.begin(), it->second.end(), [](double v) { return v == 0.0; });
    req.inputs.push_back(simd::encode_simd(kp, it->second, fpv, layout.fp_slot).ct);
  }
  for (const auto& k : compiled.consts) req.consts.push_back(simd::encode_const(kp, layout, k).ct);

  DelegatorContext& ctx = out.context;
  ctx.kp = kp;
  ctx.mode = Mode::kSimd;
  ctx.simd_layout = layout;
  ctx.program = compiled.program;
  ctx.expected_simd_fp = simd::expected_simd_fp(compiled.program, input_fps, compiled.consts);
  ctx.zero_result_possible = zero;
  return out;
}

std::pair<DelegationRequest, std::uint64_t> prepare_request(
    const circuit::Circuit& c, const std::map<std::string, std::uint64_t>& inputs,
    const fp::FingerprintScheme& scheme, const fp::WordLayout& layout, const he::KeyPair& kp,
    const WordOptions& opts) {
  WordOptions o = opts;
  o.layout = layout;
  FingerprintCache cache;
  const auto& cached = cache.get(c, scheme, o);
  auto prepared = build_word_request(cached, inputs, kp, o);
  return {std::move(prepared.request), prepared.context.expected_fp};
}

WordServer::WordServer(const DelegationRequest& req) : req_(req), box_(req.blackbox) {
  if (req.mode == Mode::kSimd) throw Error(ErrorCode::kInvalidArgument, "word server got a SIMD request");
  inputs_.reserve(req.inputs.size());
  for (const auto& ct : req.inputs) inputs_.push_back({req.blackbox.layout, ct});
}

fp::EncodedWord WordServer::add(const fp::EncodedWord& a, const fp::EncodedWord& b) {
  transcript_.emplace_back("bb_add");
  return box_.add(a, b);
}

fp::EncodedWord WordServer::add_chain(std::span<const fp::EncodedWord> words) {
  transcript_.emplace_back("bb_add_chain");
  return box_.add_chain(words);
}

fp::EncodedWord WordServer::scale(const fp::EncodedWord& a, std::uint64_t k) {
  transcript_.emplace_back("bb_scale");
  return box_.scale(a, k);
}

fp::EncodedWord WordServer::exp(const fp::EncodedWord& a) {
  if (!req_.exp_lut) throw Error(ErrorCode::kUnsupported, "request carries no exponentiation LUT");
  transcript_.emplace_back("exp_lut");
  return req_.exp_lut->apply(a);
}

fp::EncodedWord WordServer::log(const fp::EncodedWord& a) {
  if (!req_.log_lut) throw Error(ErrorCode::kUnsupported, "request carries no log LUT");
  transcript_.emplace_back("log_lut");
  return req_.log_lut->apply(a);
}

fp::EncodedWord WordServer::execute(const logmult::ExecutionPlan& plan, std::vector<fp::EncodedWord>* steps) {
  using logmult::Ref;
  using logmult::StepKind;
  plan.validate();
  if (plan.sources.size() > inputs_.size()) throw Error(ErrorCode::kInvalidArgument, "plan needs more inputs than supplied");
  std::vector<fp::EncodedWord> v;
  v.reserve(plan.steps.size());
  auto get = [&](const Ref& r) -> const fp::EncodedWord& {
    return r.kind == Ref::Kind::kSource ? inputs_[r.index] : v[r.index];
  };
  for (const auto& s : plan.steps) {
    switch (s.kind) {
      case StepKind::kAdd:
      case StepKind::kAddConst: v.push_back(add(get(s.lhs), get(s.rhs))); break;
      case StepKind::kScale: v.push_back(scale(get(s.lhs), s.scalar)); break;
      case StepKind::kExp: v.push_back(exp(get(s.lhs))); break;
      case StepKind::kLog: v.push_back(log(get(s.lhs))); break;
    }
  }
  if (steps) *steps = v;
  return v.empty() ? inputs_.at(0) : v.back();
}

SimdServer::SimdServer(const DelegationRequest& req) : req_(req), layout_{req.slot_count, 0} {
  if (req.mode != Mode::kSimd) throw Error(ErrorCode::kInvalidArgument, "SIMD server got a word request");
  layout_.validate();
  for (const auto& ct : req.inputs) inputs_.push_back({layout_, ct});
  for (const auto& ct : req.consts) consts_.push_back({layout_, ct});
}

simd::Execution SimdServer::run(const simd::SimdProgram& p, simd::ExecuteOptions options) {
  auto exec = simd::simd_execute(p, inputs_, consts_, he::Evaluator{}, options);
  for (const auto& s : exec.trace.steps) transcript_.push_back("simd:" + std::string(simd::to_string(s.op)));
  return exec;
}

DelegationResponse serve_honest(const DelegationRequest& req) {
  DelegationResponse resp;
  if (req.mode == Mode::kSimd) {
    SimdServer server(req);
    auto exec = server.run(req.program);
    resp.result = exec.result.ct;
    resp.trace = std::move(exec.trace);
    resp.transcript = server.transcript();
  } else {
    WordServer server(req);
    resp.result = server.execute(req.plan).ct;
    resp.transcript = server.transcript();
  }
  return resp;
}

VerifiedResult verify_response(const DelegatorContext& ctx, const DelegationResponse& response) {
  VerifiedResult r;
  r.transcript = response.transcript;
  if (ctx.mode == Mode::kSimd) {
    const simd::SimdVector v{ctx.simd_layout, response.result};
    const auto sv = simd::verify_simd(ctx.kp, v, ctx.expected_simd_fp,
                                      response.trace ? &*response.trace : nullptr, &ctx.program);
    r.outcome = sv.outcome;
    r.comp_slots = sv.comp;
    r.observed_fp = sv.observed_fp;
    r.reason = sv.reason;
    return r;
  }
  const auto v = fp::verify_result(ctx.kp, {ctx.layout, response.result}, ctx.expected_fp);
  r.outcome = v.outcome;
  r.comp_value = v.comp_value;
  r.plaintext = v.plaintext;
  r.observed_fp = static_cast<double>(v.observed_fp);
  if (v.outcome == fp::Outcome::kNullified) {
    r.reason = "blackbox nullified the result";
    r.escalate = ctx.zero_result_possible;
  } else if (v.outcome == fp::Outcome::kRejected) {
    r.reason = "fingerprint mismatch";
  }
  return r;
}

const std::vector<std::string>& legal_word_ops() {
  static const std::vector<std::string> ops{"bb_add", "bb_add_chain", "bb_scale", "exp_lut", "log_lut"};
  return ops;
}

const std::vector<std::string>& legal_simd_ops() {
  static const std::vector<std::string> ops{"simd:add", "simd:mul", "simd:add_const", "simd:mul_const"};
  return ops;
}

}  // namespace fpdel::protocol
