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

#include "fpdel/plan.hpp"

#include <algorithm>

#include "fpdel/error.hpp"

namespace fpdel::logmult {

std::string_view to_string(StepKind kind) noexcept {
  switch (kind) {
    case StepKind::kAdd: return "add";
    case StepKind::kAddConst: return "add_const";
    case StepKind::kExp: return "exp";
    case StepKind::kLog: return "log";
    case StepKind::kScale: return "scale";
  }
  return "unknown";
}

std::string_view to_string(PlanMode mode) noexcept {
  return mode == PlanMode::kWord ? "word" : "logmult";
}

std::size_t ExecutionPlan::count(StepKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      steps.begin(), steps.end(), [kind](const Step& s) { return s.kind == kind; }));
}

namespace {

bool is_binary(StepKind k) { return k == StepKind::kAdd || k == StepKind::kAddConst; }

void check_ref(const ExecutionPlan& plan, const Ref& r, std::size_t step) {
  if (r.kind == Ref::Kind::kSource ? r.index >= plan.sources.size() : r.index >= step) {
    throw Error(ErrorCode::kInvalidArgument,
                "plan step " + std::to_string(step) + " has a dangling operand");
  }
}

StepKind parse_step_kind(const std::string& s) {
  for (StepKind k : {StepKind::kAdd, StepKind::kAddConst, StepKind::kExp, StepKind::kLog,
                     StepKind::kScale}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::kParse, "unknown plan step '" + s + "'");
}

nlohmann::json ref_json(const Ref& r) {
  return {{r.kind == Ref::Kind::kSource ? "src" : "step", r.index}};
}

Ref ref_from(const nlohmann::json& j) {
  if (j.contains("src")) return Ref::Src(j.at("src").get<std::size_t>());
  if (j.contains("step")) return Ref::Step(j.at("step").get<std::size_t>());
  throw Error(ErrorCode::kParse, "plan operand must be {src} or {step}");
}

}  // namespace

ExecutionPlan ExecutionPlan::without_step(std::size_t index) const {
  if (index >= steps.size()) throw Error(ErrorCode::kOutOfRange, "no such plan step");
  ExecutionPlan out = *this;
  const Ref replacement = steps[index].lhs;
  out.steps.erase(out.steps.begin() + static_cast<std::ptrdiff_t>(index));
  auto fix = [&](Ref& r) {
    if (r.kind != Ref::Kind::kStep) return;
    if (r.index == index) {
      r = replacement;
    } else if (r.index > index) {
      --r.index;
    }
  };
  for (Step& s : out.steps) {
    fix(s.lhs);
    if (is_binary(s.kind)) fix(s.rhs);
  }
  return out;
}

void ExecutionPlan::validate() const {
  if (sources.empty()) throw Error(ErrorCode::kInvalidArgument, "plan has no sources");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    check_ref(*this, steps[i].lhs, i);
    if (is_binary(steps[i].kind)) check_ref(*this, steps[i].rhs, i);
    if (mode == PlanMode::kWord &&
        (steps[i].kind == StepKind::kExp || steps[i].kind == StepKind::kLog)) {
      throw Error(ErrorCode::kInvalidArgument, "LUT step in a word-mode plan");
    }
  }
}

nlohmann::json ExecutionPlan::ToJson() const {
  nlohmann::json j;
  j["mode"] = std::string(to_string(mode));
  j["counter_bits"] = counter_bits;
  j["sources"] = nlohmann::json::array();
  for (const auto& s : sources) {
    // Constant values and fingerprints live inside the encrypted inputs; the
    // plan only says which slot is which.
    j["sources"].push_back({{"kind", s.kind == SourceKind::kInput ? "input" : "const"},
                            {"domain", s.domain == Domain::kValue ? "value" : "log"}});
  }
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json js{{"op", std::string(to_string(s.kind))}, {"a", ref_json(s.lhs)}};
    if (is_binary(s.kind)) js["b"] = ref_json(s.rhs);
    if (s.kind == StepKind::kScale) js["k"] = s.scalar;
    j["steps"].push_back(js);
  }
  return j;
}

ExecutionPlan ExecutionPlan::FromJson(const nlohmann::json& j) {
  ExecutionPlan p;
  try {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "word") {
      p.mode = PlanMode::kWord;
    } else if (mode == "logmult") {
      p.mode = PlanMode::kLogMult;
    } else {
      throw Error(ErrorCode::kParse, "unknown plan mode '" + mode + "'");
    }
    p.counter_bits = j.value("counter_bits", 0U);
    for (const auto& js : j.at("sources")) {
      Source s;
      s.kind = js.at("kind").get<std::string>() == "const" ? SourceKind::kConst : SourceKind::kInput;
      s.domain = js.at("domain").get<std::string>() == "log" ? Domain::kLog : Domain::kValue;
      p.sources.push_back(std::move(s));
    }
    for (const auto& js : j.at("steps")) {
      Step s;
      s.kind = parse_step_kind(js.at("op").get<std::string>());
      s.lhs = ref_from(js.at("a"));
      if (is_binary(s.kind)) s.rhs = ref_from(js.at("b"));
      if (s.kind == StepKind::kScale) s.scalar = js.at("k").get<std::uint64_t>();
      p.steps.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("plan: ") + e.what());
  }
  p.validate();
  return p;
}

std::vector<std::uint64_t> fingerprint_trace(const ExecutionPlan& plan,
                                             std::span<const std::uint64_t> source_fp,
                                             unsigned m) {
  plan.validate();
  if (source_fp.size() < plan.sources.size()) {
    throw Error(ErrorCode::kInvalidArgument, "fingerprint scheme does not cover every plan source");
  }
  const std::uint64_t limit = m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m);
  const std::uint64_t counter_limit = std::uint64_t{1} << plan.counter_bits;
  std::vector<std::uint64_t> trace;
  std::vector<std::uint64_t> counters;  // LUT hops feeding each step
  trace.reserve(plan.steps.size());
  counters.reserve(plan.steps.size());
  auto value = [&](const Ref& r) {
    return r.kind == Ref::Kind::kSource ? source_fp[r.index] : trace[r.index];
  };
  auto hops = [&](const Ref& r) {
    return r.kind == Ref::Kind::kSource ? std::uint64_t{0} : counters[r.index];
  };
  for (const Step& s : plan.steps) {
    std::uint64_t fp = 0;
    std::uint64_t c = 0;
    switch (s.kind) {
      case StepKind::kAdd:
      case StepKind::kAddConst:
        fp = value(s.lhs) + value(s.rhs);
        c = hops(s.lhs) + hops(s.rhs);
        break;
      case StepKind::kScale:
        fp = value(s.lhs) * s.scalar;
        c = hops(s.lhs) * s.scalar;
        break;
      case StepKind::kExp:
      case StepKind::kLog:
        fp = value(s.lhs) + 1;
        c = hops(s.lhs) + 1;
        break;
    }
    if (m < 64 && fp >= limit) {
      throw Error(ErrorCode::kOutOfRange,
                  "honest fingerprint overflows the " + std::to_string(m) + "-bit section");
    }
    if (plan.counter_bits > 0 ? c >= counter_limit : c > 0) {
      throw Error(ErrorCode::kOutOfRange,
                  "plan needs " + std::to_string(c) + " LUT hops but the counter field has " +
                      std::to_string(plan.counter_bits) + " bits");
    }
    trace.push_back(fp);
    counters.push_back(c);
  }
  return trace;
}

}  // namespace fpdel::logmult
