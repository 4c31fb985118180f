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

// Homomorphic evaluation backend.
//
// The library ships one backend, a *simulator*: ciphertexts are opaque handles
// whose plaintext is reachable only through keyed decryption or the
// evaluation API. Nothing here is cryptographically hiding. The simulator
// gives the functional semantics of an FHE scheme (keys, slot kinds,
// add/sub/mul gates, a multiplicative depth budget for SIMD vectors) so that
// the verification mechanisms built on top can be exercised deterministically.
//
// A real FHE library can be plugged in by implementing `Backend`.

#ifndef FPDEL_HE_BACKEND_HPP_
#define FPDEL_HE_BACKEND_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpdel/error.hpp"

namespace fpdel {
namespace bb {
class AdditionBlackbox;
}
namespace logmult {
class LutDevice;
}
}  // namespace fpdel

namespace fpdel::he {

using KeyId = std::uint64_t;
using Handle = std::uint64_t;

enum class SlotTag : std::uint8_t { kBit = 0, kWord = 1, kSimd = 2 };

std::string_view to_string(SlotTag tag) noexcept;

// What a key encrypts. Bit slots compute in Z/2^64 so that 1 + 1 = 2 is
// observable; word slots compute mod p = 2^modulus_bits; SIMD slots hold
// doubles and carry a per-ciphertext level counter.
struct SlotKind {
  SlotTag tag = SlotTag::kBit;
  unsigned modulus_bits = 64;
  std::size_t slot_count = 0;
  unsigned depth_budget = 0;

  static SlotKind Bit() { return {SlotTag::kBit, 64, 0, 0}; }
  static SlotKind Word(unsigned modulus_bits) {
    return {SlotTag::kWord, modulus_bits, 0, 0};
  }
  static SlotKind Simd(std::size_t slot_count, unsigned depth_budget) {
    return {SlotTag::kSimd, 0, slot_count, depth_budget};
  }

  bool is_integer() const noexcept { return tag != SlotTag::kSimd; }

  // Equal tag, modulus and slot count. The depth budget is a key parameter,
  // not part of the ring, so it does not participate.
  bool compatible_with(const SlotKind& other) const noexcept;

  std::uint64_t modulus_mask() const noexcept;

  friend bool operator==(const SlotKind&, const SlotKind&) = default;
};

enum class GateKind : std::uint8_t { kAdd, kSub, kMul, kMulConst };

std::string_view to_string(GateKind kind) noexcept;

struct EvalGate {
  GateKind kind = GateKind::kAdd;
  // Only meaningful for kMulConst: the single cleartext value a gate carries.
  std::int64_t scalar = 0;

  static EvalGate Add() { return {GateKind::kAdd, 0}; }
  static EvalGate Sub() { return {GateKind::kSub, 0}; }
  static EvalGate Mul() { return {GateKind::kMul, 0}; }
  static EvalGate MulConst(std::int64_t k) { return {GateKind::kMulConst, k}; }

  bool is_binary() const noexcept { return kind != GateKind::kMulConst; }
};

class Backend;

// Backend-private state behind a ciphertext.
class CiphertextBody {
 public:
  virtual ~CiphertextBody() = default;
};

// Immutable; safe to copy and to hand between threads.
class Ciphertext {
 public:
  Ciphertext() = default;

  bool valid() const noexcept { return body_ != nullptr; }
  KeyId key_id() const noexcept { return key_id_; }
  const SlotKind& kind() const noexcept { return kind_; }
  Handle handle() const noexcept { return handle_; }
  // Remaining multiplicative levels (SIMD only; 0 otherwise).
  unsigned levels() const noexcept { return levels_; }
  const Backend* backend() const noexcept { return backend_; }

 private:
  friend class Backend;

  const Backend* backend_ = nullptr;
  KeyId key_id_ = 0;
  SlotKind kind_{};
  Handle handle_ = 0;
  unsigned levels_ = 0;
  std::shared_ptr<const CiphertextBody> body_;
};

// Passkey for the word <-> bit bridge. Only trusted blackboxes can mint one.
class TrustedAccess {
 private:
  TrustedAccess() = default;
  friend class fpdel::bb::AdditionBlackbox;
  friend class fpdel::logmult::LutDevice;
};

class KeyPair;

class Backend {
 public:
  virtual ~Backend() = default;

  virtual KeyPair keygen(const SlotKind& kind) const = 0;

  virtual Ciphertext encrypt(const KeyPair& kp, std::uint64_t value) const = 0;
  virtual Ciphertext encrypt(const KeyPair& kp,
                             std::span<const double> slots) const = 0;

  virtual std::uint64_t decrypt_integer(const KeyPair& kp,
                                        const Ciphertext& ct) const = 0;
  virtual std::vector<double> decrypt_slots(const KeyPair& kp,
                                            const Ciphertext& ct) const = 0;

  // `rhs` is required for binary gates and must be null for kMulConst.
  virtual Ciphertext eval(const EvalGate& gate, const Ciphertext& lhs,
                          const Ciphertext* rhs) const = 0;

  // Encrypted bits (LSB first) of an integer ciphertext, as word ciphertexts
  // under the same key holding 0 or 1.
  virtual std::vector<Ciphertext> decompose_bits(const Ciphertext& ct,
                                                 unsigned width,
                                                 TrustedAccess) const = 0;

  virtual std::string serialize(const Ciphertext& ct) const = 0;
  virtual Ciphertext deserialize(std::string_view bytes) const = 0;

 protected:
  Ciphertext make_ciphertext(KeyId key, const SlotKind& kind, Handle handle,
                             unsigned levels,
                             std::shared_ptr<const CiphertextBody> body) const;
  static const CiphertextBody& body_of(const Ciphertext& ct);
  static KeyPair make_keypair(const Backend* backend, KeyId id,
                              const SlotKind& kind, std::uint64_t secret);
  static std::uint64_t secret_of(const KeyPair& kp);
};

// The process-wide simulator backend.
const Backend& simulator();

struct SimulatorCounters {
  std::uint64_t evals = 0;
  std::uint64_t decrypts = 0;
};

// Monotonic counters of the simulator (for tests asserting that a code path
// never decrypts).
SimulatorCounters simulator_counters();

// Server-facing evaluation capability: gates only, no plaintext access.
class Evaluator {
 public:
  using Observer = std::function<void(const EvalGate&)>;

  Evaluator() = default;
  explicit Evaluator(Observer observer) : observer_(std::move(observer)) {}

  Ciphertext eval(const EvalGate& gate, const Ciphertext& lhs,
                  const Ciphertext* rhs = nullptr) const;

  Ciphertext add(const Ciphertext& a, const Ciphertext& b) const {
    return eval(EvalGate::Add(), a, &b);
  }
  Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const {
    return eval(EvalGate::Sub(), a, &b);
  }
  Ciphertext mul(const Ciphertext& a, const Ciphertext& b) const {
    return eval(EvalGate::Mul(), a, &b);
  }
  Ciphertext mul_const(const Ciphertext& a, std::int64_t k) const {
    return eval(EvalGate::MulConst(k), a);
  }

 private:
  Observer observer_;
};

// Holder of the decryption capability for one key.
class KeyPair {
 public:
  KeyPair() = default;

  KeyId key_id() const noexcept { return key_id_; }
  const SlotKind& kind() const noexcept { return kind_; }
  const Backend& backend() const;

  Ciphertext encrypt(std::uint64_t value) const;
  Ciphertext encrypt(std::span<const double> slots) const;
  std::uint64_t decrypt(const Ciphertext& ct) const;
  std::vector<double> decrypt_slots(const Ciphertext& ct) const;

  Evaluator evaluator() const { return Evaluator{}; }

  // Secret-side persistence, for delegators that verify in another process.
  std::string export_secret() const;
  static KeyPair import_secret(std::string_view text);

 private:
  friend class Backend;

  const Backend* backend_ = nullptr;
  KeyId key_id_ = 0;
  SlotKind kind_{};
  std::uint64_t secret_ = 0;
};

// Convenience wrappers over the simulator.
KeyPair keygen(const SlotKind& kind);
Ciphertext eval(const EvalGate& gate, const Ciphertext& lhs,
                const Ciphertext* rhs = nullptr);

std::string to_base64(std::string_view bytes);
std::string from_base64(std::string_view text);

}  // namespace fpdel::he

#endif  // FPDEL_HE_BACKEND_HPP_
