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

// Detection statistics for repeated attack trials.

#ifndef FPDEL_STATS_HPP_
#define FPDEL_STATS_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

#include <nlohmann/json.hpp>

namespace fpdel::stats {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval at 95%.
Interval wilson95(std::uint64_t successes, std::uint64_t trials);

struct DetectionStats {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double success_rate = 0.0;
  Interval ci;

  static DetectionStats From(std::uint64_t successes, std::uint64_t trials);
  nlohmann::json ToJson() const;
};

// Independent generator for one trial, derived from (seed, trial).
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

}  // namespace fpdel::stats

#endif  // FPDEL_STATS_HPP_
