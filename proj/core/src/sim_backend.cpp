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

#include <algorithm>
#include <atomic>
#include <cstring>
#include <random>
#include <string>

#include "fpdel/he_backend.hpp"

namespace fpdel::he {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_secret(KeyId id) {
  return splitmix64(id ^ 0x6670646c2d73696dULL);
}

// Plaintext behind a simulated ciphertext. Integer kinds use `value`, SIMD
// kinds use `slots`.
struct SimBody final : CiphertextBody {
  std::uint64_t value = 0;
  std::vector<double> slots;
};

constexpr char kMagic[4] = {'F', 'P', 'S', '1'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view& in) {
  if (in.size() < sizeof(T)) {
    throw Error(ErrorCode::kParse, "truncated ciphertext blob");
  }
  T v;
  std::memcpy(&v, in.data(), sizeof(T));
  in.remove_prefix(sizeof(T));
  return v;
}

class SimBackend final : public Backend {
 public:
  SimBackend() {
    std::random_device rd;
    salt_ = (std::uint64_t{rd()} << 32) ^ rd();
  }

  KeyPair keygen(const SlotKind& kind) const override {
    switch (kind.tag) {
      case SlotTag::kBit:
        break;
      case SlotTag::kWord:
        if (kind.modulus_bits == 0 || kind.modulus_bits > 64) {
          throw Error(ErrorCode::kInvalidArgument,
                      "word modulus must be 2^b with 1 <= b <= 64");
        }
        break;
      case SlotTag::kSimd:
        if (kind.depth_budget == 0) {
          throw Error(ErrorCode::kInvalidArgument, "SIMD depth budget must be >= 1");
        }
        if (kind.slot_count == 0) {
          throw Error(ErrorCode::kInvalidArgument, "SIMD slot count must be >= 1");
        }
        break;
    }
    SlotKind normalized = kind;
    if (kind.tag == SlotTag::kBit) normalized = SlotKind::Bit();
    if (kind.tag == SlotTag::kWord) normalized.slot_count = 0, normalized.depth_budget = 0;
    if (kind.tag == SlotTag::kSimd) normalized.modulus_bits = 0;
    const KeyId id = splitmix64(salt_ ^ next_key_.fetch_add(1, std::memory_order_relaxed));
    return make_keypair(this, id, normalized, derive_secret(id));
  }

  Ciphertext encrypt(const KeyPair& kp, std::uint64_t value) const override {
    check_secret(kp);
    const SlotKind& kind = kp.kind();
    if (kind.tag == SlotTag::kSimd) {
      throw Error(ErrorCode::kSlotMismatch, "integer plaintext for a SIMD key");
    }
    if (kind.tag == SlotTag::kBit && value > 1) {
      throw Error(ErrorCode::kOutOfRange, "bit plaintext must be 0 or 1");
    }
    if (kind.tag == SlotTag::kWord && (value & ~kind.modulus_mask()) != 0) {
      throw Error(ErrorCode::kOutOfRange, "word plaintext must be below the modulus");
    }
    auto body = std::make_shared<SimBody>();
    body->value = value;
    return make_ciphertext(kp.key_id(), kind, fresh_handle(), 0, std::move(body));
  }

  Ciphertext encrypt(const KeyPair& kp, std::span<const double> slots) const override {
    check_secret(kp);
    const SlotKind& kind = kp.kind();
    if (kind.tag != SlotTag::kSimd) {
      throw Error(ErrorCode::kSlotMismatch, "vector plaintext for a non-SIMD key");
    }
    if (slots.size() != kind.slot_count) {
      throw Error(ErrorCode::kOutOfRange, "SIMD plaintext length differs from slot count");
    }
    auto body = std::make_shared<SimBody>();
    body->slots.assign(slots.begin(), slots.end());
    return make_ciphertext(kp.key_id(), kind, fresh_handle(), kind.depth_budget,
                           std::move(body));
  }

  std::uint64_t decrypt_integer(const KeyPair& kp, const Ciphertext& ct) const override {
    check_access(kp, ct);
    if (!ct.kind().is_integer()) {
      throw Error(ErrorCode::kSlotMismatch, "SIMD ciphertext decrypted as integer");
    }
    return sim(ct).value;
  }

  std::vector<double> decrypt_slots(const KeyPair& kp, const Ciphertext& ct) const override {
    check_access(kp, ct);
    if (ct.kind().is_integer()) {
      throw Error(ErrorCode::kSlotMismatch, "integer ciphertext decrypted as SIMD");
    }
    return sim(ct).slots;
  }

  Ciphertext eval(const EvalGate& gate, const Ciphertext& lhs,
                  const Ciphertext* rhs) const override {
    evals_.fetch_add(1, std::memory_order_relaxed);
    if (gate.is_binary()) {
      if (rhs == nullptr) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(to_string(gate.kind)) + " needs two operands");
      }
      if (rhs->key_id() != lhs.key_id()) {
        throw Error(ErrorCode::kKeyMismatch, "eval across different keys");
      }
      if (!rhs->kind().compatible_with(lhs.kind())) {
        throw Error(ErrorCode::kSlotMismatch, "eval across different slot kinds");
      }
    } else if (rhs != nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "mul_const takes one ciphertext");
    }
    const SimBody& a = sim(lhs);
    auto body = std::make_shared<SimBody>();
    unsigned levels = 0;
    if (lhs.kind().is_integer()) {
      const std::uint64_t mask = lhs.kind().modulus_mask();
      const std::uint64_t b = rhs ? sim(*rhs).value : 0;
      switch (gate.kind) {
        case GateKind::kAdd: body->value = (a.value + b) & mask; break;
        case GateKind::kSub: body->value = (a.value - b) & mask; break;
        case GateKind::kMul: body->value = (a.value * b) & mask; break;
        case GateKind::kMulConst:
          body->value = (a.value * static_cast<std::uint64_t>(gate.scalar)) & mask;
          break;
      }
    } else {
      levels = rhs ? std::min(lhs.levels(), rhs->levels()) : lhs.levels();
      if (gate.kind == GateKind::kMul) {
        if (levels == 0) {
          throw Error(ErrorCode::kDepthExhausted, "SIMD depth budget exhausted");
        }
        --levels;
      }
      body->slots = a.slots;
      const std::vector<double>* b = rhs ? &sim(*rhs).slots : nullptr;
      for (std::size_t i = 0; i < body->slots.size(); ++i) {
        double& v = body->slots[i];
        switch (gate.kind) {
          case GateKind::kAdd: v += (*b)[i]; break;
          case GateKind::kSub: v -= (*b)[i]; break;
          case GateKind::kMul: v *= (*b)[i]; break;
          case GateKind::kMulConst: v *= static_cast<double>(gate.scalar); break;
        }
      }
    }
    return make_ciphertext(lhs.key_id(), lhs.kind(), fresh_handle(), levels,
                           std::move(body));
  }

  std::vector<Ciphertext> decompose_bits(const Ciphertext& ct, unsigned width,
                                         TrustedAccess) const override {
    if (!ct.kind().is_integer()) {
      throw Error(ErrorCode::kSlotMismatch, "bit decomposition of a SIMD ciphertext");
    }
    if (width == 0 || width > 64) {
      throw Error(ErrorCode::kInvalidArgument, "decomposition width must be 1..64");
    }
    const std::uint64_t v = sim(ct).value;
    std::vector<Ciphertext> bits;
    bits.reserve(width);
    for (unsigned i = 0; i < width; ++i) {
      auto body = std::make_shared<SimBody>();
      body->value = (v >> i) & 1U;
      bits.push_back(make_ciphertext(ct.key_id(), ct.kind(), fresh_handle(), 0,
                                     std::move(body)));
    }
    return bits;
  }

  std::string serialize(const Ciphertext& ct) const override {
    const SimBody& b = sim(ct);
    std::string out(kMagic, sizeof(kMagic));
    put<std::uint64_t>(out, ct.key_id());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(ct.kind().tag));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(ct.kind().modulus_bits));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ct.kind().slot_count));
    put<std::uint32_t>(out, ct.kind().depth_budget);
    put<std::uint32_t>(out, ct.levels());
    put<std::uint64_t>(out, ct.handle());
    if (ct.kind().is_integer()) {
      put<std::uint64_t>(out, b.value);
    } else {
      for (double d : b.slots) put<double>(out, d);
    }
    return out;
  }

  Ciphertext deserialize(std::string_view in) const override {
    if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
      throw Error(ErrorCode::kParse, "not a simulator ciphertext blob");
    }
    in.remove_prefix(sizeof(kMagic));
    const auto key = take<std::uint64_t>(in);
    SlotKind kind;
    const auto tag = take<std::uint8_t>(in);
    if (tag > static_cast<std::uint8_t>(SlotTag::kSimd)) {
      throw Error(ErrorCode::kParse, "unknown slot tag in ciphertext blob");
    }
    kind.tag = static_cast<SlotTag>(tag);
    kind.modulus_bits = take<std::uint8_t>(in);
    kind.slot_count = take<std::uint32_t>(in);
    kind.depth_budget = take<std::uint32_t>(in);
    const auto levels = take<std::uint32_t>(in);
    const auto handle = take<std::uint64_t>(in);
    auto body = std::make_shared<SimBody>();
    if (kind.is_integer()) {
      body->value = take<std::uint64_t>(in) & kind.modulus_mask();
    } else {
      body->slots.resize(kind.slot_count);
      for (double& d : body->slots) d = take<double>(in);
    }
    if (!in.empty()) throw Error(ErrorCode::kParse, "trailing bytes in ciphertext blob");
    return make_ciphertext(key, kind, handle, levels, std::move(body));
  }

  SimulatorCounters counters() const {
    return {evals_.load(std::memory_order_relaxed), decrypts_.load(std::memory_order_relaxed)};
  }

 private:
  static const SimBody& sim(const Ciphertext& ct) {
    const auto* body = dynamic_cast<const SimBody*>(&body_of(ct));
    if (body == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "ciphertext from a different backend");
    }
    return *body;
  }

  static void check_secret(const KeyPair& kp) {
    if (secret_of(kp) != derive_secret(kp.key_id())) {
      throw Error(ErrorCode::kKeyMismatch, "key pair secret does not match its id");
    }
  }

  void check_access(const KeyPair& kp, const Ciphertext& ct) const {
    decrypts_.fetch_add(1, std::memory_order_relaxed);
    check_secret(kp);
    if (kp.key_id() != ct.key_id()) {
      throw Error(ErrorCode::kKeyMismatch, "decrypt with a key that did not encrypt");
    }
  }

  Handle fresh_handle() const {
    return splitmix64(salt_ + 0x68616e646c65ULL * next_handle_.fetch_add(1, std::memory_order_relaxed));
  }

  std::uint64_t salt_ = 0;
  mutable std::atomic<std::uint64_t> next_key_{1};
  mutable std::atomic<std::uint64_t> next_handle_{1};
  mutable std::atomic<std::uint64_t> evals_{0};
  mutable std::atomic<std::uint64_t> decrypts_{0};
};

const SimBackend& sim_instance() {
  static const SimBackend instance;
  return instance;
}

}  // namespace

const Backend& simulator() { return sim_instance(); }

SimulatorCounters simulator_counters() { return sim_instance().counters(); }

}  // namespace fpdel::he
