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

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli.hpp"
#include "fpdel/adversary.hpp"
#include "fpdel/blind_ops.hpp"
#include "fpdel/circuit.hpp"
#include "fpdel/error.hpp"
#include "fpdel/protocol.hpp"
#include "fpdel/stats.hpp"
#include "fpdel/sweeps.hpp"

namespace fpdel::cli {
namespace {

using nlohmann::json;

struct Row {
  unsigned m = 0;
  unsigned n = 0;
  std::size_t i = 0;
  std::string strategy;
  stats::DetectionStats stats;
  json extra = json::object();
};

ExperimentSpec parse_spec(const json& j, const json& defaults) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "experiment entry must be an object");
  auto pick = [&](const char* key) -> const json* {
    if (j.contains(key)) return &j.at(key);
    if (defaults.is_object() && defaults.contains(key)) return &defaults.at(key);
    return nullptr;
  };
  ExperimentSpec s;
  try {
    s.scenario = j.at("scenario").get<std::string>();
    s.name = j.value("name", s.scenario);
    if (j.contains("layout")) {
      const auto& l = j.at("layout");
      s.layout = fp::WordLayout{l.at("n").get<unsigned>(), l.at("m").get<unsigned>()};
    }
    s.inputs = j.value("inputs", std::size_t{0});
    s.bound = j.value("bound", 0U);
    if (j.contains("reps")) s.reps = j.at("reps").get<std::uint64_t>();
    s.defended = j.value("defended", true);
    s.open_luts = j.value("open_luts", false);
    s.max_ops = j.value("max_ops", 0U);
    s.keys = j.value("keys", std::size_t{2});
    if (const auto* t = pick("trials")) s.trials = t->get<std::uint64_t>();
    if (const auto* sd = pick("seed")) s.seed = sd->get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad experiment config: ") + e.what());
  }
  return s;
}

std::uint64_t need_seed(const ExperimentSpec& s) {
  if (!s.seed) throw Error(ErrorCode::kInvalidArgument, "experiment '" + s.name + "' needs a seed");
  return *s.seed;
}

std::uint64_t need_trials(const ExperimentSpec& s) {
  if (!s.trials || *s.trials == 0) {
    throw Error(ErrorCode::kInvalidArgument, "experiment '" + s.name + "' needs trials >= 1");
  }
  return *s.trials;
}

class Runner {
 public:
  explicit Runner(std::string& jsonl) : jsonl_(jsonl) {}

  Row run(const ExperimentSpec& s) {
    const std::string& sc = s.scenario;
    if (sc == "masking") return masking(s);
    if (sc == "overflow") return overflow(s);
    if (sc == "subset") return subset(s);
    if (sc == "skip_exp") return skip_exp(s);
    if (sc == "reorder_simd") return reorder_simd(s);
    if (sc == "consistent_lut") return consistent_lut(s);
    if (sc == "addition_sweep") return addition_sweep(s);
    if (sc == "lut_sweep") return lut_sweep(s);
    throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + sc + "'");
  }

 private:
  stats::DetectionStats monte_carlo(const ExperimentSpec& s, const adversary::TrialFn& fn) {
    const std::uint64_t trials = need_trials(s);
    const std::uint64_t seed = need_seed(s);
    return adversary::monte_carlo(
        [&](std::mt19937_64& rng, std::uint64_t t) {
          auto r = fn(rng, t);
          json line = r.ToJson();
          line["experiment"] = s.name;
          line["trial"] = t;
          jsonl_ += line.dump();
          jsonl_ += '\n';
          return r;
        },
        trials, seed);
  }

  Row masking(const ExperimentSpec& s) {
    adversary::MaskingScenario sc;
    if (s.layout) sc.layout = *s.layout;
    if (s.inputs) sc.inputs = s.inputs;
    Row row{sc.layout.m, sc.layout.n, sc.inputs, "omit_and_mask", {}, {}};
    row.stats = monte_carlo(s, [&](std::mt19937_64& rng, std::uint64_t) {
      return adversary::attack_omit_and_mask(sc, rng);
    });
    const auto e = adversary::enumerate_masking_guesses(sc.layout.m);
    row.extra = {{"enumeration", {{"cases", e.cases}, {"successes", e.successes}, {"rate", e.rate()}}},
                 {"predicted", 1.0 / (2.0 * sc.layout.m - 2.0)}};
    return row;
  }

  Row overflow(const ExperimentSpec& s) {
    adversary::OverflowScenario sc;
    if (s.layout) sc.layout = *s.layout;
    sc.defended = s.defended;
    const std::uint64_t reps = s.reps.value_or(sc.layout.fp_limit() + 1);
    Row row{sc.layout.m, sc.layout.n, 2, "overflow_clear", {}, {}};
    row.stats = monte_carlo(s, [&](std::mt19937_64& rng, std::uint64_t) {
      return adversary::attack_overflow_clear(sc, reps, rng);
    });
    row.extra = {{"reps", reps}, {"defended", sc.defended}};
    return row;
  }

  Row subset(const ExperimentSpec& s) {
    adversary::SubsetScenario sc;
    if (s.layout) sc.layout = *s.layout;
    if (s.inputs) sc.inputs = s.inputs;
    if (s.bound) sc.bound = s.bound;
    Row row{sc.layout.m, sc.layout.n, sc.inputs, "blind_subset", {}, {}};
    row.stats = monte_carlo(s, [&](std::mt19937_64& rng, std::uint64_t) {
      return adversary::attack_blind_subset(sc, rng);
    });
    const double p = std::ldexp(1.0, -static_cast<int>(sc.layout.m));
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(row.stats.trials));
    row.extra = {{"bound", sc.bound}, {"limit", p + 3.0 * sigma}};
    return row;
  }

  Row skip_exp(const ExperimentSpec& s) {
    // 2 * (x * y + 32) with x * y = 32 so the log step has a power of two.
    static constexpr std::uint64_t kPairs[][2] = {{1, 32}, {2, 16}, {4, 8}, {8, 4}, {16, 2}, {32, 1}};
    const auto c = circuit::worked_logmult_example();
    protocol::WordOptions opts;
    opts.layout = s.layout.value_or(fp::WordLayout{8, 8});
    opts.counter_bits = 3;
    opts.compile = logmult::CompileMode::kLogMult;
    protocol::Delegator delegator;
    Row row{opts.layout.m, opts.layout.n, 2, "skip_exp", {}, {}};
    row.stats = monte_carlo(s, [&](std::mt19937_64& rng, std::uint64_t) {
      const auto& pair = kPairs[std::uniform_int_distribution<std::size_t>(0, std::size(kPairs) - 1)(rng)];
      const auto prepared =
          delegator.prepare_word(c, {{"x", pair[0]}, {"y", pair[1]}}, fp::FingerprintScheme::Complete(4), opts);
      const auto exps = adversary::exp_steps(prepared.request.plan);
      const auto idx = exps[std::uniform_int_distribution<std::size_t>(0, exps.size() - 1)(rng)];
      return adversary::attack_skip_exp(prepared, 128, idx);
    });
    row.extra = {{"cache_hits", delegator.cache().hits()}};
    return row;
  }

  Row reorder_simd(const ExperimentSpec& s) {
    const auto c = circuit::worked_simd_polynomial();
    protocol::Delegator delegator;
    std::uniform_real_distribution<double> value(0.5, 8.0);
    Row row{0, 0, 2, "reorder_simd", {}, {}};
    row.stats = monte_carlo(s, [&](std::mt19937_64& rng, std::uint64_t) {
      std::map<std::string, std::vector<double>> in{{"x", {value(rng), value(rng)}},
                                                    {"y", {value(rng), value(rng)}}};
      std::vector<double> honest;
      for (std::size_t k = 0; k < 2; ++k) honest.push_back(c.evaluate({{"x", in["x"][k]}, {"y", in["y"][k]}}));
      const auto prepared = delegator.prepare_simd(c, in);
      const auto variants = adversary::simd_variants(prepared.request.program);
      const auto& v = variants[std::uniform_int_distribution<std::size_t>(0, variants.size() - 1)(rng)];
      const bool forge = std::bernoulli_distribution(0.5)(rng);
      return adversary::attack_reorder_simd(prepared, v, forge, honest);
    });
    return row;
  }

  Row consistent_lut(const ExperimentSpec& s) {
    auto lut = blind::ClearLut::AlternatingParity(3);
    if (s.seed) {
      auto rng = stats::trial_rng(*s.seed, 0);
      // Row 0 stays 0: no encrypted 1 can be formed from an all-zero input.
      lut = blind::ClearLut::FromFunction(3, 1, [&](std::uint64_t x) { return x == 0 ? 0 : rng() & 1U; });
    }
    std::vector<he::KeyPair> keys;
    for (std::size_t k = 0; k < std::max<std::size_t>(s.keys, 1); ++k) keys.push_back(he::keygen(he::SlotKind::Bit()));
    const auto report = adversary::attack_consistent_lut(lut, keys);
    std::uint64_t matched = 0;
    for (const auto& r : report.runs) {
      if (r.output == r.lut_value) ++matched;
      json line{{"experiment", s.name}, {"input", r.input}, {"key", r.key},
                {"output", r.output}, {"lut", r.lut_value}, {"gates", r.gates}};
      jsonl_ += line.dump();
      jsonl_ += '\n';
    }
    Row row{0, lut.input_bits, keys.size(), "consistent_lut", stats::DetectionStats::From(matched, report.runs.size()), {}};
    row.extra = {{"consistent", report.consistent()}};
    return row;
  }

  Row addition_sweep(const ExperimentSpec& s) {
    sweeps::AdditionSweepConfig cfg;
    cfg.seed = need_seed(s);
    if (s.max_ops) cfg.max_ops = s.max_ops;
    if (s.inputs) cfg.max_inputs = s.inputs;
    if (s.layout) {
      cfg.max_n = s.layout->n;
      cfg.max_m = s.layout->m;
    }
    return sweep_row(s, sweeps::addition_sweep(cfg), cfg.max_m, cfg.max_n, cfg.max_inputs);
  }

  Row lut_sweep(const ExperimentSpec& s) {
    sweeps::LutSweepConfig cfg;
    if (s.max_ops) cfg.max_ops = s.max_ops;
    cfg.open_luts = s.open_luts;
    unsigned m = 0;
    unsigned n = 0;
    for (const auto& l : cfg.layouts) {
      m = std::max(m, l.m);
      n = std::max(n, l.n);
    }
    return sweep_row(s, sweeps::lut_sweep(cfg), m, n, 2);
  }

  Row sweep_row(const ExperimentSpec& s, const sweeps::SweepResult& r, unsigned m, unsigned n, std::size_t i) {
    json line = r.ToJson();
    line["experiment"] = s.name;
    jsonl_ += line.dump();
    jsonl_ += '\n';
    Row row{m, n, i, "exhaustive", stats::DetectionStats::From(r.accepted_wrong, r.values), {}};
    row.extra = {{"sweep", r.ToJson()}};
    return row;
  }

  std::string& jsonl_;
};

}  // namespace

ExperimentConfig ExperimentConfig::FromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "config must be a JSON object");
  ExperimentConfig cfg;
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  if (j.contains("experiments")) {
    const auto& list = j.at("experiments");
    if (!list.is_array() || list.empty()) throw Error(ErrorCode::kParse, "'experiments' must be a non-empty array");
    for (const auto& e : list) cfg.experiments.push_back(parse_spec(e, j));
  } else {
    cfg.experiments.push_back(parse_spec(j, json::object()));
  }
  return cfg;
}

ExperimentOutput run_experiments(const ExperimentConfig& cfg, const ExperimentOverrides& overrides) {
  ExperimentOutput out;
  out.csv = std::string(kCsvHeader) + "\n";
  Runner runner(out.jsonl);
  for (ExperimentSpec s : cfg.experiments) {
    if (overrides.seed) s.seed = overrides.seed;
    if (overrides.trials) s.trials = overrides.trials;
    const Row row = runner.run(s);
    const auto& st = row.stats;
    out.csv += fmt::format("{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f}\n", s.name, row.m, row.n, row.i, row.strategy,
                           st.trials, st.successes, st.success_rate, st.ci.low, st.ci.high);
    json entry{{"experiment", s.name}, {"scenario", s.scenario}, {"m", row.m}, {"n", row.n}, {"i", row.i},
               {"strategy", row.strategy}, {"stats", st.ToJson()}};
    if (s.seed) entry["seed"] = *s.seed;
    if (row.extra.is_object()) entry.update(row.extra);
    out.summary.push_back(std::move(entry));
  }
  return out;
}

}  // namespace fpdel::cli
