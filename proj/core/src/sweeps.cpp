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

#include "fpdel/sweeps.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "fpdel/adversary.hpp"
#include "fpdel/blackbox_add.hpp"
#include "fpdel/circuit.hpp"
#include "fpdel/error.hpp"
#include "fpdel/log_mult.hpp"

namespace fpdel::sweeps {

void SweepResult::merge(const SweepResult& o) {
  configurations += o.configurations;
  states += o.states;
  transitions += o.transitions;
  values += o.values;
  accepted_correct += o.accepted_correct;
  accepted_wrong += o.accepted_wrong;
  rejected += o.rejected;
  nullified += o.nullified;
  oracle_mismatches += o.oracle_mismatches;
  for (const auto& c : o.counterexamples) {
    if (counterexamples.size() < 10) counterexamples.push_back(c);
  }
}

nlohmann::json SweepResult::ToJson() const {
  return {{"configurations", configurations}, {"states", states},
          {"transitions", transitions},       {"values", values},
          {"accepted_correct", accepted_correct}, {"accepted_wrong", accepted_wrong},
          {"rejected", rejected},             {"nullified", nullified},
          {"oracle_mismatches", oracle_mismatches}, {"counterexamples", counterexamples}};
}

namespace {

constexpr std::size_t kMaxCounterexamples = 10;

// One server operation, both on ciphertexts and on the plaintext model.
struct Op {
  std::string name;
  bool binary = true;
  std::function<he::Ciphertext(const he::Ciphertext&, const he::Ciphertext&)> homomorphic;
  std::function<std::uint64_t(std::uint64_t, std::uint64_t)> model;
};

// Explores every pool of values reachable with a bounded number of
// operations. The simulator's gates depend only on plaintexts, so each
// (op, a, b) is evaluated homomorphically once, on a representative
// ciphertext per plaintext, and memoized.
class Explorer {
 public:
  Explorer(const he::KeyPair& kp, fp::WordLayout layout, std::uint64_t expected_fp, std::uint64_t honest_comp,
           std::vector<Op> ops, SweepResult& out)
      : kp_(kp), layout_(layout), expected_(expected_fp), honest_(honest_comp), ops_(std::move(ops)), out_(out) {}

  void run(const std::vector<he::Ciphertext>& inputs, unsigned max_ops) {
    std::vector<std::uint64_t> pool;
    for (const auto& ct : inputs) {
      const std::uint64_t v = kp_.decrypt(ct);
      rep_.emplace(v, ct);
      pool.push_back(v);
      classify(v);
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    dfs(pool, max_ops);
  }

 private:
  struct Move {
    std::size_t op;
    std::uint64_t a;
    std::uint64_t b;
    std::uint64_t r;
  };

  std::string describe(std::uint64_t v) const {
    std::ostringstream os;
    os << "n=" << layout_.n << " m=" << layout_.m << " expected_fp=" << expected_ << " honest=" << honest_
       << " got=" << v << " via";
    for (const auto& mv : path_) {
      os << " " << ops_[mv.op].name << "(" << mv.a;
      if (ops_[mv.op].binary) os << "," << mv.b;
      os << ")=" << mv.r;
    }
    return os.str();
  }

  void classify(std::uint64_t v) {
    if (!seen_.insert(v).second) return;
    ++out_.values;
    switch (adversary::classify(fp::classify(layout_, v, expected_), honest_)) {
      case adversary::TrialOutcome::kAcceptedCorrect: ++out_.accepted_correct; break;
      case adversary::TrialOutcome::kRejected: ++out_.rejected; break;
      case adversary::TrialOutcome::kNullified: ++out_.nullified; break;
      case adversary::TrialOutcome::kAcceptedWrong:
        ++out_.accepted_wrong;
        if (out_.counterexamples.size() < kMaxCounterexamples) out_.counterexamples.push_back(describe(v));
        break;
    }
  }

  std::uint64_t apply(std::size_t op, std::uint64_t a, std::uint64_t b) {
    ++out_.transitions;
    const auto key = std::make_tuple(op, a, b);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const Op& o = ops_[op];
    const he::Ciphertext ct = o.homomorphic(rep_.at(a), rep_.at(b));
    const std::uint64_t r = kp_.decrypt(ct);
    if (r != o.model(a, b)) {
      ++out_.oracle_mismatches;
      if (out_.counterexamples.size() < kMaxCounterexamples) {
        out_.counterexamples.push_back("oracle mismatch: " + o.name + "(" + std::to_string(a) + "," +
                                       std::to_string(b) + ") = " + std::to_string(r));
      }
    }
    rep_.emplace(r, ct);
    memo_.emplace(key, r);
    return r;
  }

  void step(const std::vector<std::uint64_t>& pool, unsigned remaining, std::size_t op, std::uint64_t a,
            std::uint64_t b) {
    const std::uint64_t r = apply(op, a, b);
    if (std::binary_search(pool.begin(), pool.end(), r)) return;
    path_.push_back({op, a, b, r});
    classify(r);
    std::vector<std::uint64_t> next = pool;
    next.insert(std::upper_bound(next.begin(), next.end(), r), r);
    dfs(next, remaining - 1);
    path_.pop_back();
  }

  void dfs(const std::vector<std::uint64_t>& pool, unsigned remaining) {
    auto [it, fresh] = visited_.emplace(pool, remaining);
    if (!fresh) {
      if (it->second >= remaining) return;
      it->second = remaining;
    } else {
      ++out_.states;
    }
    if (remaining == 0) return;
    for (std::size_t op = 0; op < ops_.size(); ++op) {
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!ops_[op].binary) {
          step(pool, remaining, op, pool[i], 0);
          continue;
        }
        for (std::size_t j = i; j < pool.size(); ++j) step(pool, remaining, op, pool[i], pool[j]);
      }
    }
  }

  const he::KeyPair& kp_;
  fp::WordLayout layout_;
  std::uint64_t expected_;
  std::uint64_t honest_;
  std::vector<Op> ops_;
  SweepResult& out_;
  std::map<std::uint64_t, he::Ciphertext> rep_;
  std::map<std::tuple<std::size_t, std::uint64_t, std::uint64_t>, std::uint64_t> memo_;
  std::map<std::vector<std::uint64_t>, unsigned> visited_;
  std::set<std::uint64_t> seen_;
  std::vector<Move> path_;
};

Op blackbox_op(const bb::BlackboxConfig& cfg) {
  auto box = std::make_shared<bb::AdditionBlackbox>(cfg);
  return {"bb_add", true,
          [box, layout = cfg.layout](const he::Ciphertext& a, const he::Ciphertext& b) {
            return box->add({layout, a}, {layout, b}).ct;
          },
          [cfg](std::uint64_t a, std::uint64_t b) { return bb::reference_add(cfg, a, b); }};
}

Op lut_op(std::string name, const logmult::LutDevice& device, const logmult::LutTable& table) {
  auto dev = std::make_shared<logmult::LutDevice>(device);
  auto tab = std::make_shared<logmult::LutTable>(table);
  return {std::move(name), false,
          [dev](const he::Ciphertext& a, const he::Ciphertext&) { return dev->apply({dev->layout(), a}).ct; },
          [tab](std::uint64_t a, std::uint64_t) { return tab->lookup(a); }};
}

// Absorbing-chain reference.
std::uint64_t reference_chain(const bb::BlackboxConfig& cfg, const std::vector<std::uint64_t>& words) {
  std::uint64_t acc = words.front();
  const std::uint64_t mask = cfg.layout.word_limit() - 1;
  bool dead = false;
  for (std::size_t k = 1; k < words.size(); ++k) {
    dead = dead || bb::reference_violation(cfg, acc, words[k]);
    acc = (acc + words[k]) & mask;
  }
  return dead ? 0 : acc;
}

void for_each_multiset(std::size_t parts, unsigned max_total, std::vector<unsigned>& counts, std::size_t at,
                       unsigned used, const std::function<void(const std::vector<unsigned>&)>& f) {
  if (at == parts) {
    if (used > 0) f(counts);
    return;
  }
  for (unsigned c = 0; used + c <= max_total; ++c) {
    counts[at] = c;
    for_each_multiset(parts, max_total, counts, at + 1, used + c, f);
  }
  counts[at] = 0;
}

}  // namespace

SweepResult addition_sweep(const AdditionSweepConfig& cfg) {
  SweepResult total;
  std::mt19937_64 rng(cfg.seed);
  for (unsigned n = cfg.min_n; n <= cfg.max_n; ++n) {
    for (unsigned m = cfg.min_m; m <= cfg.max_m; ++m) {
      const fp::WordLayout layout = fp::WordLayout::Make(n, m);
      const bb::BlackboxConfig box = bb::BlackboxConfig::CompleteBinary(layout);
      for (std::size_t i = 1; i <= std::min<std::size_t>(m, cfg.max_inputs); ++i) {
        const auto scheme = fp::assign_complete_fingerprints(i, m);
        for (unsigned sample = 0; sample < cfg.comp_samples; ++sample) {
          SweepResult r;
          r.configurations = 1;
          const he::KeyPair kp = he::keygen(he::SlotKind::Word(layout.word_bits()));
          std::vector<he::Ciphertext> inputs;
          std::vector<std::uint64_t> plain;
          std::uint64_t honest = 0;
          for (std::size_t j = 0; j < i; ++j) {
            const std::uint64_t c = std::uniform_int_distribution<std::uint64_t>(0, layout.comp_limit() - 1)(rng);
            honest += c;
            plain.push_back(layout.pack(c, scheme.value(j)));
            inputs.push_back(kp.encrypt(plain.back()));
          }
          const std::uint64_t expected = scheme.honest_sum();
          Explorer(kp, layout, expected, honest, {blackbox_op(box)}, r).run(inputs, cfg.max_ops);

          // Chains of up to max_ops + 1 addends, as multisets of the inputs.
          const bb::AdditionBlackbox device(box);
          std::vector<unsigned> counts(i, 0);
          for_each_multiset(i, cfg.max_ops + 1, counts, 0, 0, [&](const std::vector<unsigned>& c) {
            std::vector<fp::EncodedWord> chain;
            std::vector<std::uint64_t> model;
            for (std::size_t j = 0; j < i; ++j) {
              for (unsigned k = 0; k < c[j]; ++k) {
                chain.push_back({layout, inputs[j]});
                model.push_back(plain[j]);
              }
            }
            const std::uint64_t v = kp.decrypt(device.add_chain(chain).ct);
            ++r.transitions;
            if (v != reference_chain(box, model)) ++r.oracle_mismatches;
            switch (adversary::classify(fp::classify(layout, v, expected), honest)) {
              case adversary::TrialOutcome::kAcceptedCorrect: ++r.accepted_correct; break;
              case adversary::TrialOutcome::kRejected: ++r.rejected; break;
              case adversary::TrialOutcome::kNullified: ++r.nullified; break;
              case adversary::TrialOutcome::kAcceptedWrong: {
                ++r.accepted_wrong;
                if (r.counterexamples.size() < kMaxCounterexamples) {
                  nlohmann::json jc = c;
                  r.counterexamples.push_back("chain counts " + jc.dump() + " n=" + std::to_string(n) +
                                              " m=" + std::to_string(m) + " got " + std::to_string(v));
                }
                break;
              }
            }
          });
          total.merge(r);
        }
      }
    }
  }
  return total;
}

SweepResult lut_sweep(const LutSweepConfig& cfg) {
  SweepResult total;
  for (const auto& l : cfg.layouts) {
    const fp::WordLayout layout = fp::WordLayout::Make(l.n, l.m);
    const auto split = logmult::FpSplit::Make(layout, l.m_c);
    circuit::CircuitBuilder b;
    const auto circ = b.build(b.mul(b.input("x"), b.input("y")));
    const auto compiled = logmult::compile_circuit(circ, fp::FingerprintScheme::Complete(2), layout, split,
                                                   logmult::CompileMode::kLogMult);
    const auto& plan = compiled.plan;

    // Exponent pairs whose product still fits in n bits.
    std::set<std::pair<unsigned, unsigned>> pairs;
    const unsigned top = l.n - 1;
    for (auto [a, c] : {std::pair{0U, 0U}, {1U, 1U}, {0U, top}, {top / 2, top - top / 2}, {1U, top - 1}}) {
      if (a + c <= top) pairs.emplace(a, c);
    }
    for (const auto& [ea, eb] : pairs) {
      SweepResult r;
      r.configurations = 1;
      const he::KeyPair kp = he::keygen(he::SlotKind::Word(layout.word_bits()));
      const std::vector<std::uint64_t> values{ea, eb};  // log-domain sources
      std::vector<he::Ciphertext> inputs;
      for (std::size_t j = 0; j < 2; ++j) inputs.push_back(kp.encrypt(layout.pack(values[j], compiled.source_fp[j])));

      logmult::LutTable exp_t, log_t;
      if (cfg.open_luts) {
        exp_t = logmult::LutTable::Open(logmult::LutDirection::kExp, layout, split);
        log_t = logmult::LutTable::Open(logmult::LutDirection::kLog, layout, split);
      } else {
        exp_t = logmult::LutTable::Pinned(
            logmult::LutDirection::kExp, layout, split,
            logmult::lut_fingerprints(plan, compiled.source_fp, layout.m, logmult::LutDirection::kExp));
        log_t = logmult::LutTable::Pinned(
            logmult::LutDirection::kLog, layout, split,
            logmult::lut_fingerprints(plan, compiled.source_fp, layout.m, logmult::LutDirection::kLog));
      }
      std::vector<Op> ops{blackbox_op(bb::BlackboxConfig::CompleteBinary(layout, l.m_c)),
                          lut_op("exp_lut", logmult::LutDevice::Build(kp, exp_t), exp_t),
                          lut_op("log_lut", logmult::LutDevice::Build(kp, log_t), log_t)};
      Explorer(kp, layout, compiled.expected_fp, std::uint64_t{1} << (ea + eb), std::move(ops), r)
          .run(inputs, cfg.max_ops);
      total.merge(r);
    }
  }
  return total;
}

}  // namespace fpdel::sweeps
