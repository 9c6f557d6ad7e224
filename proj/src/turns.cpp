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

#include "stsvlcc/turns.hpp"

#include <algorithm>
#include <numeric>

namespace stsvlcc {

std::string CollectTranscript(std::span<const Cue> cues, double start,
                              double end) {
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < cues.size(); ++i) {
    double lo = std::max(start, cues[i].start);
    double hi = std::min(end, cues[i].end);
    if (hi > lo) hits.push_back(i);
  }
  std::stable_sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
    return cues[a].start < cues[b].start;
  });
  std::string out;
  for (std::size_t i : hits) {
    if (cues[i].text.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += cues[i].text;
  }
  return out;
}

TurnSet BuildTurns(std::span<const DiarSegment> segments,
                   std::span<const Cue> cues, const VideoMeta &meta,
                   double merge_gap) {
  if (!(merge_gap >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "merge_gap must be >= 0");
  if (!(meta.duration > 0.0))
    throw Error(ErrorCode::kInvalidArgument,
                "video duration must be positive for '" + meta.video_id + "'");

  TurnSet set;
  set.video_id = meta.video_id;
  set.video_duration = meta.duration;

  for (const DiarSegment &seg : segments) {
    double lo = std::max(0.0, seg.start);
    double hi = std::min(meta.duration, seg.end());
    if (!(hi > lo)) {
      set.warnings.push_back(
          {0, "segment of '" + seg.speaker + "' at " +
                  std::to_string(seg.start) + "s lies outside the video"});
      continue;
    }
    DiarSegment clipped = seg;
    clipped.start = lo;
    clipped.duration = hi - lo;
    set.clipped_segments.push_back(std::move(clipped));
  }

  // Sort-then-sweep; the secondary keys make the result independent of the
  // input order.
  std::vector<DiarSegment> sorted = set.clipped_segments;
  std::sort(sorted.begin(), sorted.end(),
            [](const DiarSegment &a, const DiarSegment &b) {
              if (a.start != b.start) return a.start < b.start;
              if (a.end() != b.end()) return a.end() < b.end();
              return a.speaker < b.speaker;
            });

  for (const DiarSegment &seg : sorted) {
    if (!set.turns.empty() && seg.start - set.turns.back().end <= merge_gap) {
      SpeakingTurn &last = set.turns.back();
      last.end = std::max(last.end, seg.end());
      last.speakers.insert(seg.speaker);
      continue;
    }
    SpeakingTurn turn;
    turn.start = seg.start;
    turn.end = seg.end();
    turn.speakers.insert(seg.speaker);
    set.turns.push_back(std::move(turn));
  }

  for (std::size_t k = 0; k < set.turns.size(); ++k) {
    SpeakingTurn &turn = set.turns[k];
    turn.index = static_cast<int>(k);
    turn.transcript = CollectTranscript(cues, turn.start, turn.end);
  }
  return set;
}

}  // namespace stsvlcc
