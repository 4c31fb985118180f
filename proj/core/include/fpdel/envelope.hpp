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

// Request/response envelopes. Ciphertexts travel as base64 strings of the
// backend serialization.
//
// request:  {"version": 1, "mode": "word|logmult|simd", "plan": {...},
//            "inputs": ["<b64>", ...],
//            "meta": {"n", "m", "blackbox": {"mode", "counter_bits"},
//                     "exp_lut", "log_lut", "consts": [...], "slot_count"}}
// response: {"version": 1, "result": "<b64>", "trace": [...],
//            "transcript": ["bb_add", ...]}

#ifndef FPDEL_ENVELOPE_HPP_
#define FPDEL_ENVELOPE_HPP_

#include <nlohmann/json.hpp>

#include "fpdel/protocol.hpp"

namespace fpdel::protocol {

inline constexpr int kEnvelopeVersion = 1;

nlohmann::json request_to_json(const DelegationRequest& req);
DelegationRequest request_from_json(const nlohmann::json& j);

nlohmann::json response_to_json(const DelegationResponse& resp);
DelegationResponse response_from_json(const nlohmann::json& j);

}  // namespace fpdel::protocol

#endif  // FPDEL_ENVELOPE_HPP_
