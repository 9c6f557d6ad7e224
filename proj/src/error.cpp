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

#include "stsvlcc/error.hpp"

namespace stsvlcc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kMalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kWrongAnswerCount: return "WrongAnswerCount";
    case ErrorCode::kGoldIndexOutOfRange: return "GoldIndexOutOfRange";
    case ErrorCode::kDuplicateQuestionId: return "DuplicateQuestionId";
    case ErrorCode::kEmptyDurations: return "EmptyDurations";
    case ErrorCode::kSinkFailure: return "SinkFailure";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kTruncatedRecord: return "TruncatedRecord";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInvalidChunking: return "InvalidChunking";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kWrongArity: return "WrongArity";
    case ErrorCode::kMissingPlan: return "MissingPlan";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kMissingSubstituteKey: return "MissingSubstituteKey";
    case ErrorCode::kUnitMismatch: return "UnitMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string Decorate(ErrorCode code, const std::string &message,
                     std::size_t line) {
  std::string out(ErrorCodeName(code));
  if (line != 0) out += " (line " + std::to_string(line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string &message, std::size_t line)
    : std::runtime_error(Decorate(code, message, line)),
      code_(code),
      line_(line) {}

}  // namespace stsvlcc
