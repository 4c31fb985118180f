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

#include "fpdel/fingerprint.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "fpdel/error.hpp"

namespace fpdel::fp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

WordLayout WordLayout::Make(unsigned n, unsigned m) {
  WordLayout l{n, m};
  l.validate();
  return l;
}

void WordLayout::validate(unsigned modulus_bits) const {
  if (n < 1 || m < 1) throw Error(ErrorCode::kInvalidArgument, "layout needs n >= 1 and m >= 1");
  if (n + m > modulus_bits || n + m > 63) {
    throw Error(ErrorCode::kInvalidArgument,
                "layout n + m = " + std::to_string(n + m) + " exceeds the word modulus (" +
                    std::to_string(modulus_bits) + " bits)");
  }
}

std::uint64_t WordLayout::pack(std::uint64_t comp, std::uint64_t fp) const {
  if (comp >= comp_limit()) {
    throw Error(ErrorCode::kOutOfRange, "computation value " + std::to_string(comp) +
                                            " does not fit in " + std::to_string(n) + " bits");
  }
  if (fp >= fp_limit()) {
    throw Error(ErrorCode::kOutOfRange, "fingerprint " + std::to_string(fp) +
                                            " does not fit in " + std::to_string(m) + " bits");
  }
  return (comp << m) | fp;
}

FingerprintScheme FingerprintScheme::Binary(std::vector<unsigned> positions) {
  return FingerprintScheme(BinaryScheme{std::move(positions)});
}
FingerprintScheme FingerprintScheme::Complete(std::size_t num_inputs) {
  return FingerprintScheme(CompleteScheme{num_inputs});
}
FingerprintScheme FingerprintScheme::Integer(std::vector<std::uint64_t> values) {
  return FingerprintScheme(IntegerScheme{std::move(values)});
}

std::string_view FingerprintScheme::name() const noexcept {
  return std::visit(Overloaded{[](const BinaryScheme&) { return std::string_view("binary"); },
                               [](const CompleteScheme&) { return std::string_view("complete"); },
                               [](const IntegerScheme&) { return std::string_view("integer"); }},
                    v_);
}

std::size_t FingerprintScheme::size() const noexcept {
  return std::visit(Overloaded{[](const BinaryScheme& s) { return s.positions.size(); },
                               [](const CompleteScheme& s) { return s.num_inputs; },
                               [](const IntegerScheme& s) { return s.values.size(); }},
                    v_);
}

std::uint64_t FingerprintScheme::value(std::size_t j) const {
  if (j >= size()) {
    throw Error(ErrorCode::kOutOfRange,
                "fingerprint scheme has no entry for input " + std::to_string(j));
  }
  return std::visit(
      Overloaded{[j](const BinaryScheme& s) { return std::uint64_t{1} << s.positions[j]; },
                 [j](const CompleteScheme&) { return std::uint64_t{1} << j; },
                 [j](const IntegerScheme& s) { return s.values[j]; }},
      v_);
}

std::vector<std::uint64_t> FingerprintScheme::values() const {
  std::vector<std::uint64_t> out(size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = value(j);
  return out;
}

std::uint64_t FingerprintScheme::honest_sum() const {
  const auto v = values();
  return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

void FingerprintScheme::validate(unsigned m) const {
  std::visit(
      Overloaded{
          [m](const BinaryScheme& s) {
            std::set<unsigned> seen;
            for (unsigned p : s.positions) {
              if (p >= m) throw Error(ErrorCode::kOutOfRange, "fingerprint position outside the field");
              if (!seen.insert(p).second) {
                throw Error(ErrorCode::kInvalidArgument, "fingerprint positions must be distinct");
              }
            }
          },
          [m](const CompleteScheme& s) {
            if (s.num_inputs > m) {
              throw Error(ErrorCode::kOutOfRange,
                          "complete scheme needs one bit per input: " + std::to_string(s.num_inputs) +
                              " inputs > " + std::to_string(m) + " bits");
            }
          },
          [m](const IntegerScheme& s) {
            std::uint64_t sum = 0;
            for (std::uint64_t k : s.values) {
              if (k < 2) throw Error(ErrorCode::kInvalidArgument, "integer fingerprints must be >= 2");
              sum += k;
            }
            if (m < 64 && sum >= (std::uint64_t{1} << m)) {
              throw Error(ErrorCode::kOutOfRange, "integer fingerprints overflow the field");
            }
          }},
      v_);
}

nlohmann::json FingerprintScheme::ToJson() const {
  return std::visit(
      Overloaded{[](const BinaryScheme& s) {
                   return nlohmann::json{{"kind", "binary"}, {"positions", s.positions}};
                 },
                 [](const CompleteScheme& s) {
                   return nlohmann::json{{"kind", "complete"}, {"inputs", s.num_inputs}};
                 },
                 [](const IntegerScheme& s) {
                   return nlohmann::json{{"kind", "integer"}, {"values", s.values}};
                 }},
      v_);
}

FingerprintScheme FingerprintScheme::FromJson(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "binary") return Binary(j.at("positions").get<std::vector<unsigned>>());
    if (kind == "complete") return Complete(j.at("inputs").get<std::size_t>());
    if (kind == "integer") return Integer(j.at("values").get<std::vector<std::uint64_t>>());
    throw Error(ErrorCode::kParse, "unknown fingerprint scheme '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("fingerprint scheme: ") + e.what());
  }
}

EncodedWord encode_word(const he::KeyPair& kp, const WordLayout& layout, std::uint64_t comp_value,
                        std::uint64_t fp_value) {
  if (kp.kind().tag != he::SlotTag::kWord) {
    throw Error(ErrorCode::kSlotMismatch, "fingerprinted words need a word-kind key");
  }
  layout.validate(kp.kind().modulus_bits);
  return {layout, kp.encrypt(layout.pack(comp_value, fp_value))};
}

Split decode_split(const he::KeyPair& kp, const EncodedWord& w) {
  const std::uint64_t plain = kp.decrypt(w.ct);
  return {plain >> w.layout.m, w.layout.fp_of(plain)};
}

std::string_view to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::kAccepted: return "accepted";
    case Outcome::kRejected: return "rejected";
    case Outcome::kNullified: return "nullified";
  }
  return "unknown";
}

Verdict classify(const WordLayout& layout, std::uint64_t plaintext, std::uint64_t expected_fp) {
  Verdict v;
  v.plaintext = plaintext;
  v.observed_fp = layout.fp_of(plaintext);
  if (plaintext == 0) {
    v.outcome = Outcome::kNullified;
  } else if (v.observed_fp == expected_fp) {
    v.outcome = Outcome::kAccepted;
    v.comp_value = plaintext >> layout.m;
  } else {
    v.outcome = Outcome::kRejected;
  }
  return v;
}

Verdict verify_result(const he::KeyPair& kp, const EncodedWord& w, std::uint64_t expected_fp) {
  return classify(w.layout, kp.decrypt(w.ct), expected_fp);
}

FingerprintScheme assign_complete_fingerprints(std::size_t i, unsigned m) {
  auto s = FingerprintScheme::Complete(i);
  s.validate(m);
  return s;
}

FingerprintScheme sample_integer_fingerprints(std::mt19937_64& rng, std::size_t i, unsigned m) {
  if (i == 0) throw Error(ErrorCode::kInvalidArgument, "integer scheme needs at least one input");
  if (m >= 63) throw Error(ErrorCode::kOutOfRange, "fingerprint field too wide");
  const std::uint64_t hi = ((std::uint64_t{1} << m) - 1) / i;
  if (hi < 2) {
    throw Error(ErrorCode::kOutOfRange, std::to_string(m) + " fingerprint bits cannot hold " +
                                            std::to_string(i) + " integer fingerprints >= 2");
  }
  std::uniform_int_distribution<std::uint64_t> dist(2, hi);
  std::vector<std::uint64_t> values(i);
  for (auto& v : values) v = dist(rng);
  return FingerprintScheme::Integer(std::move(values));
}

std::vector<std::uint64_t> source_fingerprints(const FingerprintScheme& scheme,
                                               const logmult::ExecutionPlan& plan, unsigned m) {
  if (plan.counter_bits >= m) throw Error(ErrorCode::kInvalidArgument, "counter field fills the fingerprint");
  scheme.validate(m - plan.counter_bits);
  if (scheme.size() < plan.sources.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "plan references " + std::to_string(plan.sources.size()) +
                    " sources but the scheme covers " + std::to_string(scheme.size()));
  }
  std::vector<std::uint64_t> out(plan.sources.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = scheme.value(j) << plan.counter_bits;
  return out;
}

std::uint64_t expected_fingerprint(const FingerprintScheme& scheme,
                                   const logmult::ExecutionPlan& plan, unsigned m) {
  const auto src = source_fingerprints(scheme, plan, m);
  const auto trace = logmult::fingerprint_trace(plan, src, m);
  return trace.empty() ? src.at(0) : trace.back();
}

}  // namespace fpdel::fp
