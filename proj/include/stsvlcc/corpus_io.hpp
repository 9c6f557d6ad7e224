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

// Parsers for the textual corpus inputs: WebVTT transcripts, RTTM
// diarization output, JSONL question manifests and per-video durations.
// Every function here is pure and may be called concurrently.

#ifndef STSVLCC_CORPUS_IO_HPP_
#define STSVLCC_CORPUS_IO_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "stsvlcc/error.hpp"

namespace stsvlcc {

struct Cue {
  double start = 0.0;  // seconds, millisecond resolution
  double end = 0.0;
  std::string text;    // markup stripped, whitespace collapsed

  bool operator==(const Cue &) const = default;
};

struct DiarSegment {
  std::string file_id;
  std::string speaker;
  double start = 0.0;
  double duration = 0.0;

  double end() const { return start + duration; }
  bool operator==(const DiarSegment &) const = default;
};

struct VideoMeta {
  std::string video_id;
  double duration = 0.0;
};

inline constexpr std::size_t kAnswersPerQuestion = 4;

struct QAInstance {
  std::string qa_id;
  std::string video_id;
  std::string question;
  std::array<std::string, kAnswersPerQuestion> answers;
  int gold_index = 0;
  std::size_t line = 0;  // source line in the manifest
};

/// Parses a WebVTT document. Cue settings, regions and STYLE/NOTE blocks are
/// ignored. Throws Error{kEmptyDocument, kMalformedHeader,
/// kMalformedTimestamp}. Output is stably sorted by start time.
std::vector<Cue> ParseVtt(std::string_view document);

/// Writes cues back as a minimal WebVTT document that ParseVtt reads to the
/// same (start, end, text) triples.
std::string SerializeVtt(const std::vector<Cue> &cues);

/// Formats seconds as a WebVTT timestamp "HH:MM:SS.mmm".
std::string FormatVttTimestamp(double seconds);

struct RttmResult {
  std::vector<DiarSegment> segments;
  std::vector<Warning> warnings;
};

/// SPEAKER lines only; others are skipped. Non-positive or NaN durations and
/// negative onsets are dropped with a warning. Throws kMalformedLine.
RttmResult ParseRttm(std::string_view document);

std::vector<QAInstance> LoadManifest(std::string_view document);

/// One "video_id duration" pair per line (blank lines and '#' comments
/// skipped).
std::vector<VideoMeta> ParseDurations(std::string_view document);

// Text helpers shared by the other modules.
std::string CollapseWhitespace(std::string_view text);
std::vector<std::string> SplitWhitespace(std::string_view text);

}  // namespace stsvlcc

#endif  // STSVLCC_CORPUS_IO_HPP_
