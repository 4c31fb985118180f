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

#ifndef FPDEL_ERROR_HPP_
#define FPDEL_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpdel {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kKeyMismatch,
  kSlotMismatch,
  kDepthExhausted,
  kUnsupported,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported as fpdel::Error; the code tells callers
// (and the CLI exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fpdel

#endif  // FPDEL_ERROR_HPP_
