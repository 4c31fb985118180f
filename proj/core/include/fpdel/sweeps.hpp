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

// Bounded exhaustive sweeps over server behaviour: every sequence of at most
// k legal operations, with every intermediate result checked against a
// plaintext oracle and the delegator's verdict.

#ifndef FPDEL_SWEEPS_HPP_
#define FPDEL_SWEEPS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpdel/fingerprint.hpp"

namespace fpdel::sweeps {

struct SweepResult {
  std::uint64_t configurations = 0;
  std::uint64_t states = 0;        // distinct server pools explored
  std::uint64_t transitions = 0;   // operations applied (including memo hits)
  std::uint64_t values = 0;        // distinct candidate answers classified
  std::uint64_t accepted_correct = 0;
  std::uint64_t accepted_wrong = 0;
  std::uint64_t rejected = 0;
  std::uint64_t nullified = 0;
  std::uint64_t oracle_mismatches = 0;  // homomorphic result != plaintext model
  std::vector<std::string> counterexamples;

  void merge(const SweepResult& other);
  nlohmann::json ToJson() const;
};

struct AdditionSweepConfig {
  unsigned min_n = 1;
  unsigned max_n = 4;
  unsigned min_m = 1;
  unsigned max_m = 4;
  std::size_t max_inputs = 4;
  unsigned max_ops = 5;
  unsigned comp_samples = 2;  // computation assignments per layout and input count
  std::uint64_t seed = 1;
};

// Complete scheme, carry-nullifying blackbox: every DAG of at most max_ops
// blackbox additions over the inputs, plus every multiset chain of at most
// max_ops + 1 addends.
SweepResult addition_sweep(const AdditionSweepConfig& cfg);

struct LutSweepConfig {
  struct Layout {
    unsigned n;
    unsigned m;
    unsigned m_c;
  };
  std::vector<Layout> layouts{{4, 4, 1}, {4, 4, 2}, {5, 5, 2}, {6, 6, 2}, {6, 6, 3}};
  unsigned max_ops = 5;
  // Use tables over every fingerprint instead of the plan's own.
  bool open_luts = false;
};

// Two-input multiplication plan (log-domain add, exponentiate): every
// sequence of at most max_ops blackbox additions and LUT applications.
SweepResult lut_sweep(const LutSweepConfig& cfg);

}  // namespace fpdel::sweeps

#endif  // FPDEL_SWEEPS_HPP_
