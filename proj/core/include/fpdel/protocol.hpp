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

// Delegator and server runtimes.
//
// The delegator compiles a circuit, encodes fingerprinted inputs under a
// fresh key, computes the expected fingerprint once (cached per circuit and
// scheme) and later classifies the server's answer. The server only sees
// ciphertexts, the plan, and the trusted devices it must call.

#ifndef FPDEL_PROTOCOL_HPP_
#define FPDEL_PROTOCOL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpdel/blackbox_add.hpp"
#include "fpdel/circuit.hpp"
#include "fpdel/fingerprint.hpp"
#include "fpdel/he_backend.hpp"
#include "fpdel/log_mult.hpp"
#include "fpdel/plan.hpp"
#include "fpdel/simd_fp.hpp"

namespace fpdel::protocol {

enum class Mode : std::uint8_t { kWord, kLogMult, kSimd };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

// Everything the server receives. No keys, no fingerprint values and no
// fingerprint slot index.
struct DelegationRequest {
  Mode mode = Mode::kWord;

  // word / logmult
  logmult::ExecutionPlan plan;
  bb::BlackboxConfig blackbox;
  std::optional<logmult::LutDevice> exp_lut;
  std::optional<logmult::LutDevice> log_lut;

  // simd
  simd::SimdProgram program;
  std::vector<he::Ciphertext> consts;
  std::size_t slot_count = 0;

  // One ciphertext per plan source (word modes) or per program input.
  std::vector<he::Ciphertext> inputs;
};

struct DelegationResponse {
  he::Ciphertext result;
  std::optional<simd::TraceCircuit> trace;
  std::vector<std::string> transcript;
};

// Secret-side state kept by the delegator between request and response.
struct DelegatorContext {
  he::KeyPair kp;
  Mode mode = Mode::kWord;
  fp::WordLayout layout;
  std::uint64_t expected_fp = 0;
  simd::SimdLayout simd_layout;
  double expected_simd_fp = 0.0;
  simd::SimdProgram program;
  // Set when a legitimate result may be 0, so that a nullified answer is
  // escalated instead of treated as an attack.
  bool zero_result_possible = false;

  nlohmann::json ToJson() const;
  static DelegatorContext FromJson(const nlohmann::json& j);
};

struct PreparedRequest {
  DelegationRequest request;
  DelegatorContext context;
};

struct VerifiedResult {
  fp::Outcome outcome = fp::Outcome::kRejected;
  std::optional<std::uint64_t> comp_value;  // word modes, on acceptance
  std::vector<double> comp_slots;           // simd, on acceptance
  std::uint64_t plaintext = 0;              // word modes
  double observed_fp = 0.0;
  bool escalate = false;
  std::vector<std::string> transcript;
  std::string reason;

  bool accepted() const noexcept { return outcome == fp::Outcome::kAccepted; }
  nlohmann::json ToJson() const;
};

struct WordOptions {
  fp::WordLayout layout{6, 6};
  unsigned counter_bits = 0;  // FP_m width; required for log-domain circuits
  logmult::CompileMode compile = logmult::CompileMode::kAuto;
  // Overrides the blackbox mode derived from the scheme.
  std::optional<bb::BlackboxMode> blackbox_mode;
  // Build LUTs over every fingerprint instead of the plan's own.
  bool open_luts = false;
};

struct SimdOptions {
  std::size_t slot_count = 3;
  std::size_t fp_slot = 2;
  unsigned depth_budget = 4;
};

struct CachedFingerprint {
  logmult::CompiledPlan compiled;
  fp::FingerprintScheme scheme;
};

// Expected fingerprints keyed by (circuit, scheme, layout, split, mode).
class FingerprintCache {
 public:
  const CachedFingerprint& get(const circuit::Circuit& c, const std::optional<fp::FingerprintScheme>& scheme,
                               const WordOptions& opts);

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, CachedFingerprint> entries_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

class Delegator {
 public:
  // Each prepare call draws a fresh key pair.
  PreparedRequest prepare_word(const circuit::Circuit& c, const std::map<std::string, std::uint64_t>& inputs,
                               const std::optional<fp::FingerprintScheme>& scheme = std::nullopt,
                               const WordOptions& opts = {});

  // inputs: computation slot values per input name; fps: fingerprint per
  // input name (defaults to the circuit annotation).
  PreparedRequest prepare_simd(const circuit::Circuit& c,
                               const std::map<std::string, std::vector<double>>& inputs,
                               const std::map<std::string, double>& fps = {}, const SimdOptions& opts = {});

  FingerprintCache& cache() noexcept { return cache_; }

 private:
  FingerprintCache cache_;
};

// One-shot form with a caller-supplied key; returns the request and the
// expected fingerprint.
std::pair<DelegationRequest, std::uint64_t> prepare_request(
    const circuit::Circuit& c, const std::map<std::string, std::uint64_t>& inputs,
    const fp::FingerprintScheme& scheme, const fp::WordLayout& layout, const he::KeyPair& kp,
    const WordOptions& opts = {});

// The restricted word-granularity server: it can only call the blackbox and
// the LUT devices. Every call is appended to the transcript.
class WordServer {
 public:
  explicit WordServer(const DelegationRequest& req);

  const std::vector<fp::EncodedWord>& inputs() const noexcept { return inputs_; }
  const fp::WordLayout& layout() const noexcept { return req_.blackbox.layout; }

  fp::EncodedWord add(const fp::EncodedWord& a, const fp::EncodedWord& b);
  fp::EncodedWord add_chain(std::span<const fp::EncodedWord> words);
  fp::EncodedWord scale(const fp::EncodedWord& a, std::uint64_t k);
  fp::EncodedWord exp(const fp::EncodedWord& a);
  fp::EncodedWord log(const fp::EncodedWord& a);

  // Runs a plan over this server's inputs; `steps` receives every
  // intermediate word when given.
  fp::EncodedWord execute(const logmult::ExecutionPlan& plan, std::vector<fp::EncodedWord>* steps = nullptr);

  const std::vector<std::string>& transcript() const noexcept { return transcript_; }

 private:
  const DelegationRequest& req_;
  bb::AdditionBlackbox box_;
  std::vector<fp::EncodedWord> inputs_;
  std::vector<std::string> transcript_;
};

// The SIMD server: whole-program execution only.
class SimdServer {
 public:
  explicit SimdServer(const DelegationRequest& req);

  simd::Execution run(const simd::SimdProgram& p, simd::ExecuteOptions options = {});
  const std::vector<std::string>& transcript() const noexcept { return transcript_; }

 private:
  const DelegationRequest& req_;
  simd::SimdLayout layout_;
  std::vector<simd::SimdVector> inputs_;
  std::vector<simd::SimdVector> consts_;
  std::vector<std::string> transcript_;
};

DelegationResponse serve_honest(const DelegationRequest& req);

VerifiedResult verify_response(const DelegatorContext& ctx, const DelegationResponse& response);

// Scenario-legal operation names.
const std::vector<std::string>& legal_word_ops();
const std::vector<std::string>& legal_simd_ops();

}  // namespace fpdel::protocol

#endif  // FPDEL_PROTOCOL_HPP_
