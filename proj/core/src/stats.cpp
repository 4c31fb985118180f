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

#include "fpdel/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fpdel/error.hpp"

namespace fpdel::stats {

Interval wilson95(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "no trials");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double centre = (p + z2n / 2) / (1 + z2n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2n / (4 * n)) / (1 + z2n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

DetectionStats DetectionStats::From(std::uint64_t successes, std::uint64_t trials) {
  if (successes > trials) throw Error(ErrorCode::kInvalidArgument, "more successes than trials");
  DetectionStats s;
  s.trials = trials;
  s.successes = successes;
  s.success_rate = static_cast<double>(successes) / static_cast<double>(trials);
  s.ci = wilson95(successes, trials);
  return s;
}

nlohmann::json DetectionStats::ToJson() const {
  return {{"trials", trials},
          {"successes", successes},
          {"rate", success_rate},
          {"ci_low", ci.low},
          {"ci_high", ci.high}};
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace fpdel::stats
