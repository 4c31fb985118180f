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

#include "fpdel/he_backend.hpp"

#include <openssl/evp.h>

#include <sstream>

#include <nlohmann/json.hpp>

namespace fpdel {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kKeyMismatch: return "key_mismatch";
    case ErrorCode::kSlotMismatch: return "slot_mismatch";
    case ErrorCode::kDepthExhausted: return "depth_exhausted";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace fpdel

namespace fpdel::he {

std::string_view to_string(SlotTag tag) noexcept {
  switch (tag) {
    case SlotTag::kBit: return "bit";
    case SlotTag::kWord: return "word";
    case SlotTag::kSimd: return "simd";
  }
  return "unknown";
}

std::string_view to_string(GateKind kind) noexcept {
  switch (kind) {
    case GateKind::kAdd: return "add";
    case GateKind::kSub: return "sub";
    case GateKind::kMul: return "mul";
    case GateKind::kMulConst: return "mul_const";
  }
  return "unknown";
}

bool SlotKind::compatible_with(const SlotKind& other) const noexcept {
  return tag == other.tag && modulus_bits == other.modulus_bits &&
         slot_count == other.slot_count;
}

std::uint64_t SlotKind::modulus_mask() const noexcept {
  if (modulus_bits >= 64) return ~std::uint64_t{0};
  return (std::uint64_t{1} << modulus_bits) - 1;
}

Ciphertext Backend::make_ciphertext(KeyId key, const SlotKind& kind,
                                    Handle handle, unsigned levels,
                                    std::shared_ptr<const CiphertextBody> body) const {
  Ciphertext ct;
  ct.backend_ = this;
  ct.key_id_ = key;
  ct.kind_ = kind;
  ct.handle_ = handle;
  ct.levels_ = levels;
  ct.body_ = std::move(body);
  return ct;
}

const CiphertextBody& Backend::body_of(const Ciphertext& ct) {
  if (!ct.body_) {
    throw Error(ErrorCode::kInvalidArgument, "empty ciphertext");
  }
  return *ct.body_;
}

KeyPair Backend::make_keypair(const Backend* backend, KeyId id,
                              const SlotKind& kind, std::uint64_t secret) {
  KeyPair kp;
  kp.backend_ = backend;
  kp.key_id_ = id;
  kp.kind_ = kind;
  kp.secret_ = secret;
  return kp;
}

std::uint64_t Backend::secret_of(const KeyPair& kp) { return kp.secret_; }

Ciphertext Evaluator::eval(const EvalGate& gate, const Ciphertext& lhs,
                           const Ciphertext* rhs) const {
  if (!lhs.valid() || lhs.backend() == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "eval on an empty ciphertext");
  }
  if (observer_) observer_(gate);
  return lhs.backend()->eval(gate, lhs, rhs);
}

const Backend& KeyPair::backend() const {
  if (backend_ == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "uninitialised key pair");
  }
  return *backend_;
}

Ciphertext KeyPair::encrypt(std::uint64_t value) const {
  return backend().encrypt(*this, value);
}

Ciphertext KeyPair::encrypt(std::span<const double> slots) const {
  return backend().encrypt(*this, slots);
}

std::uint64_t KeyPair::decrypt(const Ciphertext& ct) const {
  return backend().decrypt_integer(*this, ct);
}

std::vector<double> KeyPair::decrypt_slots(const Ciphertext& ct) const {
  return backend().decrypt_slots(*this, ct);
}

std::string KeyPair::export_secret() const {
  nlohmann::json j;
  j["backend"] = "simulator";
  j["key_id"] = key_id_;
  j["secret"] = secret_;
  j["tag"] = std::string(to_string(kind_.tag));
  j["modulus_bits"] = kind_.modulus_bits;
  j["slot_count"] = kind_.slot_count;
  j["depth_budget"] = kind_.depth_budget;
  return j.dump();
}

KeyPair KeyPair::import_secret(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("key file: ") + e.what());
  }
  try {
    if (j.at("backend").get<std::string>() != "simulator") {
      throw Error(ErrorCode::kUnsupported, "key file: unknown backend");
    }
    SlotKind kind;
    const auto tag = j.at("tag").get<std::string>();
    if (tag == "bit") {
      kind.tag = SlotTag::kBit;
    } else if (tag == "word") {
      kind.tag = SlotTag::kWord;
    } else if (tag == "simd") {
      kind.tag = SlotTag::kSimd;
    } else {
      throw Error(ErrorCode::kParse, "key file: unknown slot tag " + tag);
    }
    kind.modulus_bits = j.at("modulus_bits").get<unsigned>();
    kind.slot_count = j.at("slot_count").get<std::size_t>();
    kind.depth_budget = j.at("depth_budget").get<unsigned>();
    KeyPair kp;
    kp.backend_ = &simulator();
    kp.key_id_ = j.at("key_id").get<KeyId>();
    kp.kind_ = kind;
    kp.secret_ = j.at("secret").get<std::uint64_t>();
    return kp;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("key file: ") + e.what());
  }
}

KeyPair keygen(const SlotKind& kind) { return simulator().keygen(kind); }

Ciphertext eval(const EvalGate& gate, const Ciphertext& lhs,
                const Ciphertext* rhs) {
  return Evaluator{}.eval(gate, lhs, rhs);
}

std::string to_base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string from_base64(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw Error(ErrorCode::kParse, "base64 length is not a multiple of 4");
  }
  std::string out(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::kParse, "invalid base64");
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  std::size_t size = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --size;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
  out.resize(size);
  return out;
}

}  // namespace fpdel::he
