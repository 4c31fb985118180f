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

#include "fpdel/simd_fp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fpdel/error.hpp"

namespace fpdel::simd {

void SimdLayout::validate() const {
  if (slot_count < 2) throw Error(ErrorCode::kInvalidArgument, "SIMD vectors need a fingerprint slot and a computation slot");
  if (fp_slot >= slot_count) throw Error(ErrorCode::kOutOfRange, "fingerprint slot outside the vector");
}

std::string_view to_string(OpKind op) noexcept {
  switch (op) {
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kAddConst: return "add_const";
    case OpKind::kMulConst: return "mul_const";
    case OpKind::kSub: return "sub";
    case OpKind::kDiv: return "div";
  }
  return "unknown";
}

std::string_view to_string(LintFinding::Code code) noexcept {
  switch (code) {
    case LintFinding::Code::kSubtraction: return "subtraction";
    case LintFinding::Code::kDivision: return "division";
    case LintFinding::Code::kConstNegative: return "negative_constant";
    case LintFinding::Code::kConstFractional: return "fractional_constant";
    case LintFinding::Code::kConstIdentity: return "identity_constant";
    case LintFinding::Code::kConstDuplicate: return "duplicate_constant";
    case LintFinding::Code::kDepth: return "depth";
  }
  return "unknown";
}

namespace {

bool is_mul(OpKind op) { return op == OpKind::kMul || op == OpKind::kMulConst; }
bool needs_const_rhs(OpKind op) { return op == OpKind::kAddConst || op == OpKind::kMulConst; }

OpKind parse_op(const std::string& s) {
  for (OpKind k : {OpKind::kAdd, OpKind::kMul, OpKind::kAddConst, OpKind::kMulConst, OpKind::kSub, OpKind::kDiv}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::kParse, "unknown SIMD op '" + s + "'");
}

nlohmann::json operand_json(const Operand& o) {
  const char* key = o.kind == Operand::Kind::kInput ? "in" : o.kind == Operand::Kind::kConst ? "const" : "step";
  return {{key, o.index}};
}

Operand operand_from(const nlohmann::json& j) {
  if (j.contains("in")) return Operand::Input(j.at("in").get<std::size_t>());
  if (j.contains("const")) return Operand::Const(j.at("const").get<std::size_t>());
  if (j.contains("step")) return Operand::Step(j.at("step").get<std::size_t>());
  throw Error(ErrorCode::kParse, "SIMD operand must be {in}, {const} or {step}");
}

nlohmann::json steps_json(const std::vector<SimdStep>& steps) {
  auto arr = nlohmann::json::array();
  for (const auto& s : steps) {
    arr.push_back({{"op", std::string(to_string(s.op))}, {"a", operand_json(s.lhs)}, {"b", operand_json(s.rhs)}});
  }
  return arr;
}

std::vector<SimdStep> steps_from(const nlohmann::json& arr) {
  std::vector<SimdStep> out;
  for (const auto& js : arr) {
    out.push_back({parse_op(js.at("op").get<std::string>()), operand_from(js.at("a")), operand_from(js.at("b"))});
  }
  return out;
}

template <class T, class Get>
T run_steps(const SimdProgram& p, std::span<const T> inputs, Get&& const_at) {
  std::vector<T> v;
  v.reserve(p.steps.size());
  auto get = [&](const Operand& o) -> T {
    switch (o.kind) {
      case Operand::Kind::kInput: return inputs[o.index];
      case Operand::Kind::kConst: return const_at(o.index);
      case Operand::Kind::kStep: return v[o.index];
    }
    return T{};
  };
  for (const auto& s : p.steps) {
    const T a = get(s.lhs);
    const T b = get(s.rhs);
    switch (s.op) {
      case OpKind::kAdd:
      case OpKind::kAddConst: v.push_back(a + b); break;
      case OpKind::kMul:
      case OpKind::kMulConst: v.push_back(a * b); break;
      case OpKind::kSub: v.push_back(a - b); break;
      case OpKind::kDiv: v.push_back(a / b); break;
    }
  }
  return v.empty() ? inputs[0] : v.back();
}

}  // namespace

unsigned SimdProgram::depth_cost() const {
  std::vector<unsigned> depth;
  depth.reserve(steps.size());
  auto d = [&](const Operand& o) { return o.kind == Operand::Kind::kStep ? depth[o.index] : 0U; };
  unsigned best = 0;
  for (const auto& s : steps) {
    const unsigned here = std::max(d(s.lhs), d(s.rhs)) + (is_mul(s.op) ? 1U : 0U);
    depth.push_back(here);
    best = std::max(best, here);
  }
  return best;
}

void SimdProgram::validate() const {
  if (num_inputs == 0) throw Error(ErrorCode::kInvalidArgument, "SIMD program needs an input");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const Operand* o : {&steps[i].lhs, &steps[i].rhs}) {
      const std::size_t limit = o->kind == Operand::Kind::kInput   ? num_inputs
                                : o->kind == Operand::Kind::kConst ? num_consts
                                                                   : i;
      if (o->index >= limit) {
        throw Error(ErrorCode::kInvalidArgument, "SIMD step " + std::to_string(i) + " has a dangling operand");
      }
    }
    if (needs_const_rhs(steps[i].op) && steps[i].rhs.kind != Operand::Kind::kConst) {
      throw Error(ErrorCode::kInvalidArgument, "SIMD step " + std::to_string(i) + " needs a constant operand");
    }
  }
}

nlohmann::json SimdProgram::ToJson() const {
  return {{"simd", true}, {"inputs", num_inputs}, {"consts", num_consts}, {"steps", steps_json(steps)}};
}

SimdProgram SimdProgram::FromJson(const nlohmann::json& j) {
  SimdProgram p;
  try {
    p.num_inputs = j.at("inputs").get<std::size_t>();
    p.num_consts = j.value("consts", std::size_t{0});
    p.steps = steps_from(j.at("steps"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("SIMD program: ") + e.what());
  }
  p.validate();
  return p;
}

CompiledSimd compile_simd(const circuit::Circuit& c) {
  using circuit::NodeOp;
  c.validate();
  CompiledSimd out;
  std::map<std::string, std::size_t> input_index;
  for (const auto& decl : c.inputs) {
    input_index.emplace(decl.name, out.input_names.size());
    out.input_names.push_back(decl.name);
  }
  std::vector<Operand> node_ref(c.nodes.size());
  std::vector<std::size_t> unannotated;
  auto& steps = out.program.steps;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const auto& n = c.nodes[i];
    switch (n.op) {
      case NodeOp::kInput: {
        auto it = input_index.find(n.input_name);
        if (it == input_index.end()) {
          it = input_index.emplace(n.input_name, out.input_names.size()).first;
          out.input_names.push_back(n.input_name);
        }
        node_ref[i] = Operand::Input(it->second);
        break;
      }
      case NodeOp::kConst:
        node_ref[i] = Operand::Const(out.consts.size());
        if (!n.fp) unannotated.push_back(out.consts.size());
        out.consts.push_back({n.value, n.fp.value_or(0.0)});
        break;
      default: {
        Operand a = node_ref[n.lhs];
        Operand b = node_ref[n.rhs];
        OpKind op = OpKind::kAdd;
        switch (n.op) {
          case NodeOp::kAdd: op = OpKind::kAdd; break;
          case NodeOp::kMul: op = OpKind::kMul; break;
          case NodeOp::kSub: op = OpKind::kSub; break;
          default: op = OpKind::kDiv; break;
        }
        const bool commutes = op == OpKind::kAdd || op == OpKind::kMul;
        if (commutes && a.kind == Operand::Kind::kConst && b.kind != Operand::Kind::kConst) std::swap(a, b);
        if (commutes && b.kind == Operand::Kind::kConst) op = op == OpKind::kAdd ? OpKind::kAddConst : OpKind::kMulConst;
        steps.push_back({op, a, b});
        node_ref[i] = Operand::Step(steps.size() - 1);
      }
    }
  }
  // Distinct stand-ins, so that swapping two constants moves the fingerprint.
  double next = 2.0;
  for (const std::size_t k : unannotated) {
    auto taken = [&](double v) {
      return std::any_of(out.consts.begin(), out.consts.end(), [v](const SimdConst& sc) { return sc.fp == v; });
    };
    while (taken(next)) next += 1.0;
    out.consts[k].fp = next;
  }
  out.program.num_inputs = out.input_names.size();
  out.program.num_consts = out.consts.size();
  if (node_ref[c.output].kind != Operand::Kind::kStep) {
    if (node_ref[c.output].kind == Operand::Kind::kConst || node_ref[c.output].index != 0) {
      throw Error(ErrorCode::kUnsupported, "a SIMD program without steps must output its first input");
    }
    steps.clear();
  } else if (node_ref[c.output].index + 1 != steps.size()) {
    steps.resize(node_ref[c.output].index + 1);
  }
  out.program.validate();
  return out;
}

std::vector<LintFinding> lint_program(const SimdProgram& p, std::span<const double> fp_consts,
                                      unsigned depth_budget) {
  using Code = LintFinding::Code;
  std::vector<LintFinding> out;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (p.steps[i].op == OpKind::kSub) out.push_back({Code::kSubtraction, i, "step " + std::to_string(i) + " subtracts"});
    if (p.steps[i].op == OpKind::kDiv) out.push_back({Code::kDivision, i, "step " + std::to_string(i) + " divides"});
  }
  for (std::size_t i = 0; i < fp_consts.size(); ++i) {
    const double v = fp_consts[i];
    const std::string where = "constant " + std::to_string(i) + " fingerprint ";
    if (!std::isfinite(v) || v != std::floor(v)) {
      out.push_back({Code::kConstFractional, i, where + "is not an integer"});
    } else if (v < 0) {
      out.push_back({Code::kConstNegative, i, where + "is negative"});
    } else if (v < 2) {
      out.push_back({Code::kConstIdentity, i, where + "is an identity value (< 2)"});
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (fp_consts[k] == v) {
        out.push_back({Code::kConstDuplicate, i, where + "repeats constant " + std::to_string(k)});
        break;
      }
    }
  }
  if (const unsigned d = p.depth_cost(); d > depth_budget) {
    out.push_back({Code::kDepth, depth_budget,
                   "depth " + std::to_string(d) + " exceeds budget " + std::to_string(depth_budget)});
  }
  return out;
}

std::vector<double> comp_slots(const SimdLayout& layout, std::span<const double> slots) {
  std::vector<double> out;
  out.reserve(layout.comp_slots());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i != layout.fp_slot) out.push_back(slots[i]);
  }
  return out;
}

namespace {

std::vector<double> assemble(const SimdLayout& layout, std::span<const double> comp, double fp) {
  if (comp.size() != layout.comp_slots()) {
    throw Error(ErrorCode::kSlotMismatch, "expected " + std::to_string(layout.comp_slots()) +
                                              " computation values, got " + std::to_string(comp.size()));
  }
  std::vector<double> slots;
  slots.reserve(layout.slot_count);
  for (std::size_t i = 0, k = 0; i < layout.slot_count; ++i) {
    slots.push_back(i == layout.fp_slot ? fp : comp[k++]);
  }
  return slots;
}

}  // namespace

SimdVector encode_simd(const he::KeyPair& kp, std::span<const double> comp_values, double fp_value,
                       std::size_t fp_slot) {
  if (kp.kind().tag != he::SlotTag::kSimd) throw Error(ErrorCode::kSlotMismatch, "SIMD encoding needs a SIMD key");
  const SimdLayout layout{kp.kind().slot_count, fp_slot};
  layout.validate();
  if (!std::isfinite(fp_value) || fp_value != std::floor(fp_value) || fp_value < 2) {
    throw Error(ErrorCode::kInvalidArgument, "SIMD fingerprints must be integers >= 2");
  }
  const auto slots = assemble(layout, comp_values, fp_value);
  return {layout, kp.encrypt(std::span<const double>(slots))};
}

SimdVector encode_const(const he::KeyPair& kp, const SimdLayout& layout, const SimdConst& c) {
  // Constants are broadcast to every computation slot.
  const std::vector<double> comp(layout.comp_slots(), c.comp);
  const auto slots = assemble(layout, comp, c.fp);
  return {layout, kp.encrypt(std::span<const double>(slots))};
}

circuit::Circuit TraceCircuit::to_circuit(std::size_t num_inputs, std::size_t num_consts) const {
  circuit::CircuitBuilder b;
  std::vector<std::size_t> in(num_inputs);
  std::vector<std::size_t> cs(num_consts);
  for (std::size_t i = 0; i < num_inputs; ++i) in[i] = b.input("i" + std::to_string(i));
  for (std::size_t i = 0; i < num_consts; ++i) cs[i] = b.input("c" + std::to_string(i));
  std::vector<std::size_t> st;
  auto node = [&](const Operand& o) {
    switch (o.kind) {
      case Operand::Kind::kInput: return in.at(o.index);
      case Operand::Kind::kConst: return cs.at(o.index);
      case Operand::Kind::kStep: return st.at(o.index);
    }
    return std::size_t{0};
  };
  for (const auto& s : steps) {
    const auto a = node(s.lhs);
    const auto c = node(s.rhs);
    switch (s.op) {
      case OpKind::kAdd:
      case OpKind::kAddConst: st.push_back(b.add(a, c)); break;
      case OpKind::kMul:
      case OpKind::kMulConst: st.push_back(b.mul(a, c)); break;
      case OpKind::kSub: st.push_back(b.sub(a, c)); break;
      case OpKind::kDiv: st.push_back(b.div(a, c)); break;
    }
  }
  return b.build(st.empty() ? std::nullopt : std::optional<std::size_t>(st.back()), true);
}

nlohmann::json TraceCircuit::ToJson() const { return steps_json(steps); }

TraceCircuit TraceCircuit::FromJson(const nlohmann::json& j) {
  try {
    return {steps_from(j)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("trace: ") + e.what());
  }
}

Execution simd_execute(const SimdProgram& p, std::span<const SimdVector> inputs,
                       std::span<const SimdVector> consts, const he::Evaluator& ev,
                       ExecuteOptions options) {
  p.validate();
  if (inputs.size() != p.num_inputs || consts.size() != p.num_consts) {
    throw Error(ErrorCode::kInvalidArgument, "SIMD program operand count mismatch");
  }
  if (!options.skip_lint) {
    // The server sees no fingerprint values, so only structure is checked here.
    const auto findings = lint_program(p, {}, inputs[0].ct.levels());
    if (!findings.empty()) throw Error(ErrorCode::kUnsupported, "program rejected: " + findings.front().message);
  }
  const SimdLayout layout = inputs[0].layout;
  for (const auto& v : inputs) {
    if (!(v.layout == layout)) throw Error(ErrorCode::kSlotMismatch, "SIMD inputs disagree on slot layout");
  }
  for (const auto& v : consts) {
    if (!(v.layout == layout)) throw Error(ErrorCode::kSlotMismatch, "SIMD constants disagree on slot layout");
  }
  Execution out;
  std::vector<he::Ciphertext> v;
  v.reserve(p.steps.size());
  auto get = [&](const Operand& o) -> const he::Ciphertext& {
    switch (o.kind) {
      case Operand::Kind::kInput: return inputs[o.index].ct;
      case Operand::Kind::kConst: return consts[o.index].ct;
      case Operand::Kind::kStep: break;
    }
    return v[o.index];
  };
  for (const auto& s : p.steps) {
    const auto& a = get(s.lhs);
    const auto& b = get(s.rhs);
    switch (s.op) {
      case OpKind::kAdd:
      case OpKind::kAddConst: v.push_back(ev.add(a, b)); break;
      case OpKind::kMul:
      case OpKind::kMulConst: v.push_back(ev.mul(a, b)); break;
      case OpKind::kSub: v.push_back(ev.sub(a, b)); break;
      case OpKind::kDiv: throw Error(ErrorCode::kUnsupported, "homomorphic division is not available");
    }
    out.trace.steps.push_back(s);
  }
  out.result = {layout, v.empty() ? inputs[0].ct : v.back()};
  return out;
}

double evaluate_slot(const SimdProgram& p, std::span<const double> inputs, std::span<const double> consts) {
  p.validate();
  if (inputs.size() < p.num_inputs || consts.size() < p.num_consts) {
    throw Error(ErrorCode::kInvalidArgument, "missing operand values");
  }
  return run_steps<double>(p, inputs, [&](std::size_t i) { return consts[i]; });
}

double expected_simd_fp(const SimdProgram& p, std::span<const double> input_fps,
                        std::span<const SimdConst> consts) {
  std::vector<double> c;
  c.reserve(consts.size());
  for (const auto& k : consts) c.push_back(k.fp);
  return evaluate_slot(p, input_fps, c);
}

SimdVerdict verify_simd(const he::KeyPair& kp, const SimdVector& result, double expected_fp,
                        const TraceCircuit* trace, const SimdProgram* plan) {
  const auto slots = kp.decrypt_slots(result.ct);
  SimdVerdict v;
  v.observed_fp = slots.at(result.layout.fp_slot);
  if (trace && plan && !trace->matches(*plan)) {
    v.trace_ok = false;
    v.reason = "trace does not reproduce the program";
    return v;
  }
  const double rounded = std::nearbyint(v.observed_fp);
  if (!std::isfinite(v.observed_fp) || std::fabs(v.observed_fp - rounded) >= kFpResidual) {
    v.reason = "fingerprint slot is not an integer";
    return v;
  }
  if (rounded != expected_fp) {
    v.reason = "fingerprint mismatch";
    return v;
  }
  v.outcome = fp::Outcome::kAccepted;
  v.comp = comp_slots(result.layout, slots);
  return v;
}

}  // namespace fpdel::simd
