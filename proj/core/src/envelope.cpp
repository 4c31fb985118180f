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

#include "fpdel/envelope.hpp"

#include <string>

#include "fpdel/error.hpp"

namespace fpdel::protocol {

namespace {

std::string pack(const he::Ciphertext& ct) { return he::to_base64(ct.backend()->serialize(ct)); }

he::Ciphertext unpack(const nlohmann::json& j) {
  return he::simulator().deserialize(he::from_base64(j.get<std::string>()));
}

void check_version(const nlohmann::json& j) {
  const int v = j.at("version").get<int>();
  if (v != kEnvelopeVersion) throw Error(ErrorCode::kParse, "unsupported envelope version " + std::to_string(v));
}

template <class F>
auto parsing(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

nlohmann::json request_to_json(const DelegationRequest& req) {
  nlohmann::json j{{"version", kEnvelopeVersion}, {"mode", std::string(to_string(req.mode))}};
  j["inputs"] = nlohmann::json::array();
  for (const auto& ct : req.inputs) j["inputs"].push_back(pack(ct));
  nlohmann::json meta = nlohmann::json::object();
  if (req.mode == Mode::kSimd) {
    j["plan"] = req.program.ToJson();
    meta["slot_count"] = req.slot_count;
    meta["consts"] = nlohmann::json::array();
    for (const auto& ct : req.consts) meta["consts"].push_back(pack(ct));
  } else {
    j["plan"] = req.plan.ToJson();
    meta["n"] = req.blackbox.layout.n;
    meta["m"] = req.blackbox.layout.m;
    meta["blackbox"] = {{"mode", std::string(bb::to_string(req.blackbox.mode))},
                        {"counter_bits", req.blackbox.counter_bits}};
    if (req.exp_lut) meta["exp_lut"] = req.exp_lut->ToJson();
    if (req.log_lut) meta["log_lut"] = req.log_lut->ToJson();
  }
  j["meta"] = std::move(meta);
  return j;
}

DelegationRequest request_from_json(const nlohmann::json& j) {
  return parsing("request", [&] {
    check_version(j);
    DelegationRequest req;
    req.mode = parse_mode(j.at("mode").get<std::string>());
    for (const auto& s : j.at("inputs")) req.inputs.push_back(unpack(s));
    const auto& meta = j.at("meta");
    if (req.mode == Mode::kSimd) {
      req.program = simd::SimdProgram::FromJson(j.at("plan"));
      req.slot_count = meta.at("slot_count").get<std::size_t>();
      for (const auto& s : meta.at("consts")) req.consts.push_back(unpack(s));
    } else {
      req.plan = logmult::ExecutionPlan::FromJson(j.at("plan"));
      const auto& box = meta.at("blackbox");
      req.blackbox = {fp::WordLayout::Make(meta.at("n").get<unsigned>(), meta.at("m").get<unsigned>()),
                      bb::parse_blackbox_mode(box.at("mode").get<std::string>()),
                      box.at("counter_bits").get<unsigned>()};
      req.blackbox.validate();
      if (meta.contains("exp_lut")) req.exp_lut = logmult::LutDevice::FromJson(meta.at("exp_lut"));
      if (meta.contains("log_lut")) req.log_lut = logmult::LutDevice::FromJson(meta.at("log_lut"));
    }
    if (req.inputs.empty()) throw Error(ErrorCode::kParse, "request has no inputs");
    return req;
  });
}

nlohmann::json response_to_json(const DelegationResponse& resp) {
  nlohmann::json j{{"version", kEnvelopeVersion}, {"result", pack(resp.result)}, {"transcript", resp.transcript}};
  if (resp.trace) j["trace"] = resp.trace->ToJson();
  return j;
}

DelegationResponse response_from_json(const nlohmann::json& j) {
  return parsing("response", [&] {
    check_version(j);
    DelegationResponse resp;
    resp.result = unpack(j.at("result"));
    resp.transcript = j.value("transcript", std::vector<std::string>{});
    if (j.contains("trace")) resp.trace = simd::TraceCircuit::FromJson(j.at("trace"));
    return resp;
  });
}

}  // namespace fpdel::protocol
