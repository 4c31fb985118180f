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

// Arithmetic circuits in the JSON circuit format:
//
//   {
//     "simd": false,                         // optional
//     "inputs": [{"name": "x", "fp": 3}, {"name": "y"}],
//     "nodes": [
//       {"id": "two", "op": "const", "args": [2]},
//       {"id": "x",   "op": "input", "args": ["x"]},
//       {"id": "t",   "op": "mul",   "args": ["two", "x"]},
//       {"id": "c3",  "op": "const", "args": [3], "fp": 3},
//       ...
//     ],
//     "output": "r"                          // optional, defaults to last node
//   }
//
// Nodes must reference earlier nodes only. "sub" and "div" parse so that the
// SIMD linter can report them; the word compiler rejects them.

#ifndef FPDEL_CIRCUIT_HPP_
#define FPDEL_CIRCUIT_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fpdel::circuit {

enum class NodeOp { kInput, kConst, kAdd, kSub, kMul, kDiv };

std::string_view to_string(NodeOp op) noexcept;

struct Node {
  std::string id;
  NodeOp op = NodeOp::kConst;
  // Operand indices into Circuit::nodes (binary ops only).
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  std::string input_name;       // kInput
  double value = 0.0;           // kConst
  std::optional<double> fp;     // kConst fingerprint annotation
};

struct InputDecl {
  std::string name;
  std::optional<double> fp;
};

class Circuit {
 public:
  std::vector<InputDecl> inputs;
  std::vector<Node> nodes;
  std::size_t output = 0;
  bool simd = false;

  static Circuit FromJson(const nlohmann::json& j);
  static Circuit Parse(std::string_view text);
  nlohmann::json ToJson() const;

  const Node& output_node() const { return nodes.at(output); }
  const InputDecl* find_input(std::string_view name) const;

  // Plaintext evaluation over reals.
  double evaluate(const std::map<std::string, double>& values) const;

  // Structural checks; throws fpdel::Error.
  void validate() const;
};

// Builder used by tests, demos and generators.
class CircuitBuilder {
 public:
  std::size_t input(const std::string& name, std::optional<double> fp = std::nullopt);
  std::size_t constant(double value, std::optional<double> fp = std::nullopt);
  std::size_t add(std::size_t a, std::size_t b);
  std::size_t sub(std::size_t a, std::size_t b);
  std::size_t mul(std::size_t a, std::size_t b);
  std::size_t div(std::size_t a, std::size_t b);
  Circuit build(std::optional<std::size_t> output = std::nullopt, bool simd = false) const;

 private:
  std::size_t push(Node node);
  Circuit circuit_;
};

// F(x, y) = (2 * x) + y + 3, constants encrypted.
Circuit worked_linear_example();
// F(x, y) = 2 * (x * y + 32).
Circuit worked_logmult_example();
// F(x, y) = (((2 * x) + 1.5) * (y * 3)) + 0.1
Circuit worked_simd_polynomial();

}  // namespace fpdel::circuit

#endif  // FPDEL_CIRCUIT_HPP_
