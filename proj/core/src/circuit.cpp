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

#include "fpdel/circuit.hpp"

#include <unordered_map>

#include "fpdel/error.hpp"

namespace fpdel::circuit {
namespace {

bool is_binary(NodeOp op) {
  return op == NodeOp::kAdd || op == NodeOp::kSub || op == NodeOp::kMul ||
         op == NodeOp::kDiv;
}

NodeOp parse_op(const std::string& s) {
  if (s == "input") return NodeOp::kInput;
  if (s == "const") return NodeOp::kConst;
  if (s == "add") return NodeOp::kAdd;
  if (s == "sub") return NodeOp::kSub;
  if (s == "mul") return NodeOp::kMul;
  if (s == "div") return NodeOp::kDiv;
  throw Error(ErrorCode::kParse, "unknown circuit op '" + s + "'");
}

}  // namespace

std::string_view to_string(NodeOp op) noexcept {
  switch (op) {
    case NodeOp::kInput: return "input";
    case NodeOp::kConst: return "const";
    case NodeOp::kAdd: return "add";
    case NodeOp::kSub: return "sub";
    case NodeOp::kMul: return "mul";
    case NodeOp::kDiv: return "div";
  }
  return "unknown";
}

Circuit Circuit::FromJson(const nlohmann::json& j) {
  Circuit c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::kParse, "circuit must be a JSON object");
    c.simd = j.value("simd", false);
    if (j.contains("inputs")) {
      for (const auto& in : j.at("inputs")) {
        InputDecl decl;
        decl.name = in.at("name").get<std::string>();
        if (in.contains("fp") && !in.at("fp").is_null()) decl.fp = in.at("fp").get<double>();
        c.inputs.push_back(std::move(decl));
      }
    }
    const auto& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty()) {
      throw Error(ErrorCode::kParse, "circuit has no nodes");
    }
    std::unordered_map<std::string, std::size_t> index;
    const bool declared = !c.inputs.empty();
    for (const auto& jn : nodes) {
      Node n;
      n.id = jn.at("id").get<std::string>();
      n.op = parse_op(jn.at("op").get<std::string>());
      const auto& args = jn.at("args");
      if (index.contains(n.id)) throw Error(ErrorCode::kParse, "duplicate node id '" + n.id + "'");
      switch (n.op) {
        case NodeOp::kInput:
          if (args.size() != 1) throw Error(ErrorCode::kParse, "input node needs one name");
          n.input_name = args.at(0).get<std::string>();
          if (!c.find_input(n.input_name)) {
            if (declared) {
              throw Error(ErrorCode::kParse, "undeclared input '" + n.input_name + "'");
            }
            c.inputs.push_back({n.input_name, std::nullopt});
          }
          break;
        case NodeOp::kConst:
          if (args.size() != 1) throw Error(ErrorCode::kParse, "const node needs one value");
          n.value = args.at(0).get<double>();
          if (jn.contains("fp") && !jn.at("fp").is_null()) n.fp = jn.at("fp").get<double>();
          break;
        default: {
          if (args.size() != 2) {
            throw Error(ErrorCode::kParse, "node '" + n.id + "' needs two operands");
          }
          auto resolve = [&](const nlohmann::json& a) {
            const auto name = a.get<std::string>();
            auto it = index.find(name);
            if (it == index.end()) {
              throw Error(ErrorCode::kParse, "node '" + n.id + "' references unknown or later node '" + name + "'");
            }
            return it->second;
          };
          n.lhs = resolve(args.at(0));
          n.rhs = resolve(args.at(1));
        }
      }
      index.emplace(n.id, c.nodes.size());
      c.nodes.push_back(std::move(n));
    }
    if (j.contains("output")) {
      const auto out = j.at("output").get<std::string>();
      auto it = index.find(out);
      if (it == index.end()) throw Error(ErrorCode::kParse, "unknown output node '" + out + "'");
      c.output = it->second;
    } else {
      c.output = c.nodes.size() - 1;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("circuit: ") + e.what());
  }
  c.validate();
  return c;
}

Circuit Circuit::Parse(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("circuit: ") + e.what());
  }
  return FromJson(j);
}

nlohmann::json Circuit::ToJson() const {
  nlohmann::json j;
  if (simd) j["simd"] = true;
  j["inputs"] = nlohmann::json::array();
  for (const auto& in : inputs) {
    nlohmann::json ji{{"name", in.name}};
    if (in.fp) ji["fp"] = *in.fp;
    j["inputs"].push_back(ji);
  }
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : nodes) {
    nlohmann::json jn{{"id", n.id}, {"op", std::string(to_string(n.op))}};
    switch (n.op) {
      case NodeOp::kInput: jn["args"] = {n.input_name}; break;
      case NodeOp::kConst:
        jn["args"] = {n.value};
        if (n.fp) jn["fp"] = *n.fp;
        break;
      default: jn["args"] = {nodes.at(n.lhs).id, nodes.at(n.rhs).id};
    }
    j["nodes"].push_back(jn);
  }
  j["output"] = nodes.at(output).id;
  return j;
}

const InputDecl* Circuit::find_input(std::string_view name) const {
  for (const auto& in : inputs) {
    if (in.name == name) return &in;
  }
  return nullptr;
}

double Circuit::evaluate(const std::map<std::string, double>& values) const {
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    switch (n.op) {
      case NodeOp::kInput: {
        auto it = values.find(n.input_name);
        if (it == values.end()) {
          throw Error(ErrorCode::kInvalidArgument, "missing value for input '" + n.input_name + "'");
        }
        v[i] = it->second;
        break;
      }
      case NodeOp::kConst: v[i] = n.value; break;
      case NodeOp::kAdd: v[i] = v[n.lhs] + v[n.rhs]; break;
      case NodeOp::kSub: v[i] = v[n.lhs] - v[n.rhs]; break;
      case NodeOp::kMul: v[i] = v[n.lhs] * v[n.rhs]; break;
      case NodeOp::kDiv: v[i] = v[n.lhs] / v[n.rhs]; break;
    }
  }
  return v.at(output);
}

void Circuit::validate() const {
  if (nodes.empty()) throw Error(ErrorCode::kInvalidArgument, "empty circuit");
  if (output >= nodes.size()) throw Error(ErrorCode::kInvalidArgument, "output index out of range");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (is_binary(n.op) && (n.lhs >= i || n.rhs >= i)) {
      throw Error(ErrorCode::kInvalidArgument, "node '" + n.id + "' is not topologically ordered");
    }
    if (n.op == NodeOp::kInput && !find_input(n.input_name)) {
      throw Error(ErrorCode::kInvalidArgument, "undeclared input '" + n.input_name + "'");
    }
  }
}

std::size_t CircuitBuilder::push(Node node) {
  node.id = "n" + std::to_string(circuit_.nodes.size());
  circuit_.nodes.push_back(std::move(node));
  return circuit_.nodes.size() - 1;
}

std::size_t CircuitBuilder::input(const std::string& name, std::optional<double> fp) {
  if (!circuit_.find_input(name)) circuit_.inputs.push_back({name, fp});
  Node n;
  n.op = NodeOp::kInput;
  n.input_name = name;
  return push(std::move(n));
}

std::size_t CircuitBuilder::constant(double value, std::optional<double> fp) {
  Node n;
  n.op = NodeOp::kConst;
  n.value = value;
  n.fp = fp;
  return push(std::move(n));
}

namespace {
Node binary(NodeOp op, std::size_t a, std::size_t b) {
  Node n;
  n.op = op;
  n.lhs = a;
  n.rhs = b;
  return n;
}
}  // namespace

std::size_t CircuitBuilder::add(std::size_t a, std::size_t b) { return push(binary(NodeOp::kAdd, a, b)); }
std::size_t CircuitBuilder::sub(std::size_t a, std::size_t b) { return push(binary(NodeOp::kSub, a, b)); }
std::size_t CircuitBuilder::mul(std::size_t a, std::size_t b) { return push(binary(NodeOp::kMul, a, b)); }
std::size_t CircuitBuilder::div(std::size_t a, std::size_t b) { return push(binary(NodeOp::kDiv, a, b)); }

Circuit CircuitBuilder::build(std::optional<std::size_t> output, bool simd) const {
  Circuit c = circuit_;
  c.output = output.value_or(c.nodes.empty() ? 0 : c.nodes.size() - 1);
  c.simd = simd;
  c.validate();
  return c;
}

Circuit worked_linear_example() {
  CircuitBuilder b;
  const auto x = b.input("x", 3);
  const auto two_x = b.mul(b.constant(2), x);
  const auto sum = b.add(two_x, b.input("y", 2));
  return b.build(b.add(sum, b.constant(3, 3)));
}

Circuit worked_logmult_example() {
  CircuitBuilder b;
  const auto xy = b.mul(b.input("x"), b.input("y"));
  const auto inner = b.add(xy, b.constant(32));
  return b.build(b.mul(b.constant(2), inner));
}

Circuit worked_simd_polynomial() {
  CircuitBuilder b;
  const auto two_x = b.mul(b.constant(2, 2), b.input("x", 3));
  const auto lhs = b.add(two_x, b.constant(1.5, 5));
  const auto rhs = b.mul(b.input("y", 4), b.constant(3, 7));
  return b.build(b.add(b.mul(lhs, rhs), b.constant(0.1, 11)), /*simd=*/true);
}

}  // namespace fpdel::circuit
