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

#ifndef STSVLCC_TURNS_HPP_
#define STSVLCC_TURNS_HPP_

#include <set>
#include <span>
#include <string>
#include <vector>

#include "stsvlcc/corpus_io.hpp"

namespace stsvlcc {

inline constexpr double kDefaultMergeGap = 0.5;

struct SpeakingTurn {
  int index = 0;
  double start = 0.0;
  double end = 0.0;
  std::set<std::string> speakers;
  std::string transcript;

  double duration() const { return end - start; }
  bool operator==(const SpeakingTurn &) const = default;
};

struct TurnSet {
  std::string video_id;
  double video_duration = 0.0;
  std::vector<SpeakingTurn> turns;
  // Per-speaker segments after clipping, kept for diagnostics.
  std::vector<DiarSegment> clipped_segments;
  std::vector<Warning> warnings;

  std::size_t size() const { return turns.size(); }
};

/// Clips segments to the video, merges overlapping or near-adjacent
/// segments (gap <= merge_gap) into turns, and attaches every cue with
/// positive overlap to each turn it touches.
TurnSet BuildTurns(std::span<const DiarSegment> segments,
                   std::span<const Cue> cues, const VideoMeta &meta,
                   double merge_gap = kDefaultMergeGap);

/// Space-joined text of every cue overlapping (start, end) with positive
/// measure, in temporal order.
std::string CollectTranscript(std::span<const Cue> cues, double start,
                              double end);

}  // namespace stsvlcc

#endif  // STSVLCC_TURNS_HPP_
