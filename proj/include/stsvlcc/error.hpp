// Copyright (c) 2026 The stsvlcc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STSVLCC_ERROR_HPP_
#define STSVLCC_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stsvlcc {

enum class ErrorCode {
  // corpus-io
  kMalformedHeader,
  kMalformedTimestamp,
  kEmptyDocument,
  kMalformedLine,
  kWrongAnswerCount,
  kGoldIndexOutOfRange,
  kDuplicateQuestionId,
  // sampler
  kEmptyDurations,
  // embeddings
  kSinkFailure,
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedRecord,
  kDimMismatch,
  // fusion / training
  kNonFiniteLoss,
  // qa-eval
  kInvalidChunking,
  kEmptyList,
  kWrongArity,
  kMissingPlan,
  kMissingEmbedding,
  kTimeout,
  kProtocolError,
  kTransportError,
  // ablation
  kMissingSubstituteKey,
  kUnitMismatch,
  // generic
  kInvalidArgument,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures surface as this exception type; `code()` carries
// the typed reason and `line()` the 1-based source line when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

// Non-fatal diagnostic attached to a parse/build result.
struct Warning {
  std::size_t line = 0;  // 0 when not tied to a source line
  std::string message;

  bool operator==(const Warning &) const = default;
};

}  // namespace stsvlcc

#endif  // STSVLCC_ERROR_HPP_
