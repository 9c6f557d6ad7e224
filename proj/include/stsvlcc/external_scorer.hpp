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

// Line-delimited JSON bridge to an out-of-process scorer.
//
//   request:  {"id", "question", "answer", "transcript_window", "d",
//              "fused": [base64(f32 LE x d) per frame]}
//   response: {"id", "p_yes"}   with p_yes strictly inside (0, 1)
//
// Endpoints are "tcp://host:port" or "exec:<shell command>"; the latter runs
// the command with its stdin/stdout wired to the channel.

#ifndef STSVLCC_EXTERNAL_SCORER_HPP_
#define STSVLCC_EXTERNAL_SCORER_HPP_

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "stsvlcc/qa_eval.hpp"

namespace stsvlcc {

std::string Base64Encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> Base64Decode(std::string_view text);

std::string EncodeScoreRequest(const PromptChunk &chunk, const std::string &id);
/// Throws kProtocolError on malformed JSON, id mismatch or p_yes outside (0,1).
double DecodeScoreResponse(std::string_view line, const std::string &expected_id);

class ExternalScorer final : public Scorer {
 public:
  explicit ExternalScorer(const std::string &endpoint, double timeout_seconds = 30.0);
  ~ExternalScorer() override;

  ExternalScorer(const ExternalScorer &) = delete;
  ExternalScorer &operator=(const ExternalScorer &) = delete;

  // One request in flight per connection; concurrent callers serialize.
  double Score(const PromptChunk &chunk) const override;

 private:
  void SendLine(const std::string &line) const;
  std::string ReadLine() const;

  int fd_ = -1;
  int child_pid_ = -1;
  double timeout_seconds_;
  mutable std::mutex mu_;
  mutable std::string buffer_;
  mutable std::uint64_t counter_ = 0;
  mutable bool broken_ = false;
};

}  // namespace stsvlcc

#endif  // STSVLCC_EXTERNAL_SCORER_HPP_
