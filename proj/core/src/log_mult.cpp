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

#include "fpdel/log_mult.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <set>
#include <string>

#include "fpdel/blind_ops.hpp"
#include "fpdel/error.hpp"

namespace fpdel::logmult {

FpSplit FpSplit::Make(const WordLayout& layout, unsigned m_c) {
  if (m_c >= layout.m) throw Error(ErrorCode::kInvalidArgument, "counter field must be narrower than m");
  FpSplit s{layout.m - m_c, m_c};
  s.validate(layout);
  return s;
}

void FpSplit::validate(const WordLayout& layout) const {
  if (m_a + m_c != layout.m) {
    throw Error(ErrorCode::kInvalidArgument, "m_a + m_c must equal the fingerprint width");
  }
  if (m_a == 0) throw Error(ErrorCode::kInvalidArgument, "addition fingerprint field is empty");
}

std::uint64_t to_log_encoding(std::uint64_t value) {
  if (!std::has_single_bit(value)) {
    throw Error(ErrorCode::kInvalidArgument,
                "log encoding needs a positive power of two, got " + std::to_string(value));
  }
  return static_cast<std::uint64_t>(std::countr_zero(value));
}

std::string_view to_string(LutDirection d) noexcept { return d == LutDirection::kExp ? "exp" : "log"; }

namespace {

constexpr unsigned kMaxTableBits = 16;

void check_table_shape(const WordLayout& layout, const FpSplit& split) {
  split.validate(layout);
  if (split.m_c == 0) throw Error(ErrorCode::kInvalidArgument, "LUTs need a counting field");
  if (layout.word_bits() > kMaxTableBits) {
    throw Error(ErrorCode::kOutOfRange, "LUT enumeration is capped at n + m <= 16");
  }
}

// (input comp, output comp) pairs of a direction.
std::vector<std::pair<std::uint64_t, std::uint64_t>> comp_map(LutDirection d, unsigned n) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t j = 0; j < n; ++j) {
    if (d == LutDirection::kExp) {
      out.emplace_back(j, std::uint64_t{1} << j);
    } else {
      out.emplace_back(std::uint64_t{1} << j, j);
    }
  }
  return out;
}

LutTable make_table(LutDirection d, const WordLayout& layout, const FpSplit& split,
                    std::span<const std::uint64_t> fps) {
  LutTable t{d, layout, split, {}};
  for (const auto& [in, out] : comp_map(d, layout.n)) {
    for (std::uint64_t f : fps) {
      if ((f & split.counter_mask()) == split.counter_mask()) continue;  // counter saturated
      const std::uint64_t key = layout.pack(in, f);
      if (key == 0) continue;  // a nullified word stays nullified
      t.rows.push_back({key, layout.pack(out, f + 1)});
    }
  }
  return t;
}

}  // namespace

LutTable LutTable::Open(LutDirection d, const WordLayout& layout, const FpSplit& split) {
  check_table_shape(layout, split);
  std::vector<std::uint64_t> fps(layout.fp_limit());
  for (std::uint64_t f = 0; f < fps.size(); ++f) fps[f] = f;
  return make_table(d, layout, split, fps);
}

LutTable LutTable::Pinned(LutDirection d, const WordLayout& layout, const FpSplit& split,
                          std::span<const std::uint64_t> fingerprints) {
  check_table_shape(layout, split);
  std::set<std::uint64_t> uniq(fingerprints.begin(), fingerprints.end());
  for (std::uint64_t f : uniq) {
    if (f >= layout.fp_limit()) throw Error(ErrorCode::kOutOfRange, "pinned fingerprint outside the field");
  }
  const std::vector<std::uint64_t> fps(uniq.begin(), uniq.end());
  return make_table(d, layout, split, fps);
}

std::uint64_t LutTable::lookup(std::uint64_t word) const noexcept {
  for (const auto& r : rows) {
    if (r.key == word) return r.out;
  }
  return 0;
}

LutDevice::LutDevice(LutDirection direction, WordLayout layout, std::vector<EncRow> rows,
                     he::Ciphertext one, he::Evaluator ev)
    : direction_(direction), layout_(layout), rows_(std::move(rows)), one_(std::move(one)),
      ev_(std::move(ev)) {
  if (!one_.valid()) throw Error(ErrorCode::kInvalidArgument, "LUT device needs an encrypted 1");
  for (const auto& r : rows_) {
    if (r.key_bits.size() != layout_.word_bits() || !r.out.valid()) {
      throw Error(ErrorCode::kInvalidArgument, "malformed LUT row");
    }
  }
}

LutDevice LutDevice::Build(const he::KeyPair& kp, const LutTable& table) {
  table.layout.validate(kp.kind().modulus_bits);
  std::vector<EncRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    EncRow e;
    e.key_bits.reserve(table.layout.word_bits());
    for (unsigned j = 0; j < table.layout.word_bits(); ++j) e.key_bits.push_back(kp.encrypt((r.key >> j) & 1U));
    e.out = kp.encrypt(r.out);
    rows.push_back(std::move(e));
  }
  return LutDevice(table.direction, table.layout, std::move(rows), kp.encrypt(1));
}

EncodedWord LutDevice::apply(const EncodedWord& w) const {
  if (!(w.layout == layout_)) throw Error(ErrorCode::kInvalidArgument, "word layout does not match the LUT");
  const he::TrustedAccess access;
  const auto bits = w.ct.backend()->decompose_bits(w.ct, layout_.word_bits(), access);
  he::Ciphertext acc = blind::extract_zero(ev_, w.ct);
  for (const auto& row : rows_) {
    const he::Ciphertext match = blind::blind_equal(ev_, bits, row.key_bits, one_);
    acc = ev_.add(acc, ev_.mul(match, row.out));
  }
  return {layout_, acc};
}

LutDevice LutDevice::with_evaluator(he::Evaluator ev) const {
  LutDevice copy = *this;
  copy.ev_ = std::move(ev);
  return copy;
}

nlohmann::json LutDevice::ToJson() const {
  const auto& be = one_.backend();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rows_) {
    nlohmann::json bits = nlohmann::json::array();
    for (const auto& b : r.key_bits) bits.push_back(he::to_base64(be->serialize(b)));
    rows.push_back({{"key", std::move(bits)}, {"out", he::to_base64(be->serialize(r.out))}});
  }
  return {{"direction", std::string(to_string(direction_))},
          {"n", layout_.n},
          {"m", layout_.m},
          {"one", he::to_base64(be->serialize(one_))},
          {"rows", std::move(rows)}};
}

LutDevice LutDevice::FromJson(const nlohmann::json& j) {
  try {
    const auto& be = he::simulator();
    auto load = [&](const nlohmann::json& s) { return be.deserialize(he::from_base64(s.get<std::string>())); };
    const auto dir = j.at("direction").get<std::string>();
    if (dir != "exp" && dir != "log") throw Error(ErrorCode::kParse, "unknown LUT direction '" + dir + "'");
    const WordLayout layout = WordLayout::Make(j.at("n").get<unsigned>(), j.at("m").get<unsigned>());
    std::vector<EncRow> rows;
    for (const auto& jr : j.at("rows")) {
      EncRow r;
      for (const auto& b : jr.at("key")) r.key_bits.push_back(load(b));
      r.out = load(jr.at("out"));
      rows.push_back(std::move(r));
    }
    return LutDevice(dir == "exp" ? LutDirection::kExp : LutDirection::kLog, layout, std::move(rows),
                     load(j.at("one")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("LUT: ") + e.what());
  }
}

LutPair build_luts(const he::KeyPair& kp, const WordLayout& layout, const FpSplit& split) {
  return {LutDevice::Build(kp, LutTable::Open(LutDirection::kExp, layout, split)),
          LutDevice::Build(kp, LutTable::Open(LutDirection::kLog, layout, split))};
}

std::vector<std::uint64_t> lut_fingerprints(const ExecutionPlan& plan,
                                            std::span<const std::uint64_t> source_fp, unsigned m,
                                            LutDirection direction) {
  const auto trace = fingerprint_trace(plan, source_fp, m);
  const StepKind want = direction == LutDirection::kExp ? StepKind::kExp : StepKind::kLog;
  std::set<std::uint64_t> out;
  for (const Step& s : plan.steps) {
    if (s.kind != want) continue;
    out.insert(s.lhs.kind == Ref::Kind::kSource ? source_fp[s.lhs.index] : trace[s.lhs.index]);
  }
  return {out.begin(), out.end()};
}

LutPair build_luts(const he::KeyPair& kp, const WordLayout& layout, const FpSplit& split,
                   const ExecutionPlan& plan, std::span<const std::uint64_t> source_fp) {
  const auto exp_fps = lut_fingerprints(plan, source_fp, layout.m, LutDirection::kExp);
  const auto log_fps = lut_fingerprints(plan, source_fp, layout.m, LutDirection::kLog);
  return {LutDevice::Build(kp, LutTable::Pinned(LutDirection::kExp, layout, split, exp_fps)),
          LutDevice::Build(kp, LutTable::Pinned(LutDirection::kLog, layout, split, log_fps))};
}

EncodedWord apply_lut(const LutDevice& lut, const EncodedWord& w) { return lut.apply(w); }

namespace {

using circuit::Circuit;
using circuit::Node;
using circuit::NodeOp;

class Compiler {
 public:
  Compiler(const Circuit& c, bool log_mode) : c_(c), log_mode_(log_mode) {}

  ExecutionPlan run(unsigned counter_bits) {
    plan_.mode = log_mode_ ? PlanMode::kLogMult : PlanMode::kWord;
    plan_.counter_bits = counter_bits;
    value(c_.output);
    plan_.validate();
    return std::move(plan_);
  }

 private:
  bool is_leaf(std::size_t i) const {
    const NodeOp op = c_.nodes[i].op;
    return op == NodeOp::kInput || op == NodeOp::kConst || constant(i).has_value();
  }

  std::optional<double> constant(std::size_t i) const {
    const Node& n = c_.nodes[i];
    switch (n.op) {
      case NodeOp::kConst: return n.value;
      case NodeOp::kAdd:
      case NodeOp::kMul: {
        const auto a = constant(n.lhs);
        const auto b = constant(n.rhs);
        if (!a || !b) return std::nullopt;
        return n.op == NodeOp::kAdd ? *a + *b : *a * *b;
      }
      default: return std::nullopt;
    }
  }

  static std::uint64_t integral(double v) {
    if (v < 0 || v != std::floor(v) || v >= 18446744073709551616.0) {
      throw Error(ErrorCode::kUnsupported,
                  "word circuits need non-negative integer constants, got " + std::to_string(v));
    }
    return static_cast<std::uint64_t>(v);
  }

  Ref add_source(std::size_t node, Domain domain) {
    const Node& n = c_.nodes[node];
    Source s;
    s.domain = domain;
    if (n.op == NodeOp::kInput) {
      s.kind = SourceKind::kInput;
      s.name = n.input_name;
      if (const auto* decl = c_.find_input(n.input_name); decl && decl->fp) {
        s.fp_hint = integral(*decl->fp);
      }
    } else {
      const std::uint64_t v = integral(*constant(node));
      s.kind = SourceKind::kConst;
      s.value = domain == Domain::kLog ? to_log_encoding(v) : v;
      s.name = "const:" + std::to_string(v);
      if (n.op == NodeOp::kConst && n.fp) s.fp_hint = integral(*n.fp);
    }
    plan_.sources.push_back(std::move(s));
    return Ref::Src(plan_.sources.size() - 1);
  }

  bool is_const_source(const Ref& r) const {
    return r.kind == Ref::Kind::kSource && plan_.sources[r.index].kind == SourceKind::kConst;
  }

  Ref push(Step s) {
    plan_.steps.push_back(s);
    return Ref::Step(plan_.steps.size() - 1);
  }

  // Compiles both operands, the one needing steps first.
  template <class F>
  std::pair<Ref, Ref> operands(const Node& n, F&& f) {
    if (is_leaf(n.lhs) && !is_leaf(n.rhs)) {
      const Ref b = f(n.rhs);
      const Ref a = f(n.lhs);
      return {b, a};
    }
    const Ref a = f(n.lhs);
    const Ref b = f(n.rhs);
    return {a, b};
  }

  Ref sum(const Ref& a, const Ref& b) {
    const bool with_const = is_const_source(a) || is_const_source(b);
    if (is_const_source(a) && !is_const_source(b)) return push({StepKind::kAddConst, b, a, 0});
    return push({with_const ? StepKind::kAddConst : StepKind::kAdd, a, b, 0});
  }

  static void reject(const Node& n) {
    throw Error(ErrorCode::kUnsupported,
                "operation '" + std::string(circuit::to_string(n.op)) + "' (node " + n.id +
                    ") is not available on fingerprinted words");
  }

  Ref value(std::size_t i) {
    const Node& n = c_.nodes[i];
    if (n.op == NodeOp::kInput || constant(i)) return add_source(i, Domain::kValue);
    switch (n.op) {
      case NodeOp::kAdd: {
        const auto [a, b] = operands(n, [this](std::size_t k) { return value(k); });
        return sum(a, b);
      }
      case NodeOp::kMul: {
        if (!log_mode_) {
          const auto ka = constant(n.lhs);
          const auto kb = constant(n.rhs);
          if (!ka && !kb) {
            throw Error(ErrorCode::kUnsupported,
                        "node " + n.id + " multiplies two encrypted values; compile in log mode");
          }
          const std::uint64_t k = integral(ka ? *ka : *kb);
          return push({StepKind::kScale, value(ka ? n.rhs : n.lhs), {}, k});
        }
        const auto [a, b] = operands(n, [this](std::size_t k) { return log(k); });
        return push({StepKind::kExp, sum(a, b), {}, 0});
      }
      default: reject(n);
    }
    return {};
  }

  Ref log(std::size_t i) {
    const Node& n = c_.nodes[i];
    if (n.op == NodeOp::kInput || constant(i)) return add_source(i, Domain::kLog);
    switch (n.op) {
      case NodeOp::kAdd: return push({StepKind::kLog, value(i), {}, 0});
      case NodeOp::kMul: {
        const auto [a, b] = operands(n, [this](std::size_t k) { return log(k); });
        return sum(a, b);
      }
      default: reject(n);
    }
    return {};
  }

  const Circuit& c_;
  bool log_mode_;
  ExecutionPlan plan_;
};

bool needs_log_domain(const Circuit& c) {
  std::vector<bool> is_const(c.nodes.size(), false);
  bool needs = false;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const Node& n = c.nodes[i];
    switch (n.op) {
      case NodeOp::kConst: is_const[i] = true; break;
      case NodeOp::kAdd: is_const[i] = is_const[n.lhs] && is_const[n.rhs]; break;
      case NodeOp::kMul:
        is_const[i] = is_const[n.lhs] && is_const[n.rhs];
        if (!is_const[n.lhs] && !is_const[n.rhs]) needs = true;
        break;
      default: break;
    }
  }
  return needs;
}

}  // namespace

ExecutionPlan compile_circuit(const Circuit& c, CompileMode mode, unsigned counter_bits) {
  c.validate();
  const bool log_mode = mode == CompileMode::kLogMult || (mode == CompileMode::kAuto && needs_log_domain(c));
  if (log_mode && counter_bits == 0) {
    throw Error(ErrorCode::kInvalidArgument, "log-domain plans need a counting field");
  }
  return Compiler(c, log_mode).run(counter_bits);
}

CompiledPlan compile_circuit(const Circuit& c, const fp::FingerprintScheme& scheme,
                             const WordLayout& layout, const FpSplit& split, CompileMode mode) {
  split.validate(layout);
  CompiledPlan out;
  out.plan = compile_circuit(c, mode, split.m_c);
  if (out.plan.mode == PlanMode::kLogMult && out.plan.lut_steps() > split.counter_mask()) {
    throw Error(ErrorCode::kOutOfRange,
                std::to_string(out.plan.lut_steps()) + " LUT steps exceed the " +
                    std::to_string(split.m_c) + "-bit counting field");
  }
  if (!scheme.is_integer() && plan_scales(out.plan)) {
    throw Error(ErrorCode::kUnsupported, "scaling by a clear constant needs an integer fingerprint scheme");
  }
  out.source_fp = fp::source_fingerprints(scheme, out.plan, layout.m);
  out.trace = fingerprint_trace(out.plan, out.source_fp, layout.m);
  out.expected_fp = out.trace.empty() ? out.source_fp.at(0) : out.trace.back();
  return out;
}

bool plan_scales(const ExecutionPlan& plan) {
  return std::any_of(plan.steps.begin(), plan.steps.end(),
                     [](const Step& s) { return s.kind == StepKind::kScale && s.scalar >= 2; });
}

fp::FingerprintScheme scheme_from_annotations(const ExecutionPlan& plan) {
  std::vector<std::uint64_t> values;
  for (const auto& s : plan.sources) {
    if (!s.fp_hint) return fp::FingerprintScheme::Complete(plan.sources.size());
    values.push_back(*s.fp_hint);
  }
  return fp::FingerprintScheme::Integer(std::move(values));
}

std::vector<std::uint64_t> source_values(const ExecutionPlan& plan,
                                         const std::map<std::string, std::uint64_t>& inputs) {
  std::vector<std::uint64_t> out;
  out.reserve(plan.sources.size());
  for (const auto& s : plan.sources) {
    if (s.kind == SourceKind::kConst) {
      out.push_back(s.value);
      continue;
    }
    const auto it = inputs.find(s.name);
    if (it == inputs.end()) throw Error(ErrorCode::kInvalidArgument, "no value for input '" + s.name + "'");
    out.push_back(s.domain == Domain::kLog ? to_log_encoding(it->second) : it->second);
  }
  return out;
}

std::uint64_t evaluate_plan(const ExecutionPlan& plan, std::span<const std::uint64_t> source_comp) {
  if (source_comp.size() < plan.sources.size()) {
    throw Error(ErrorCode::kInvalidArgument, "missing source values");
  }
  std::vector<std::uint64_t> v;
  auto get = [&](const Ref& r) { return r.kind == Ref::Kind::kSource ? source_comp[r.index] : v[r.index]; };
  for (const Step& s : plan.steps) {
    switch (s.kind) {
      case StepKind::kAdd:
      case StepKind::kAddConst: v.push_back(get(s.lhs) + get(s.rhs)); break;
      case StepKind::kScale: v.push_back(get(s.lhs) * s.scalar); break;
      case StepKind::kExp: {
        const std::uint64_t e = get(s.lhs);
        if (e >= 64) throw Error(ErrorCode::kOutOfRange, "exponent too large");
        v.push_back(std::uint64_t{1} << e);
        break;
      }
      case StepKind::kLog: v.push_back(to_log_encoding(get(s.lhs))); break;
    }
  }
  return v.empty() ? source_comp[0] : v.back();
}

}  // namespace fpdel::logmult
