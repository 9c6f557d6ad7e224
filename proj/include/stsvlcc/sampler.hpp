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

// Speaking-turn frame sampling. The frame budget is split across turns in
// proportion to turn duration, frames are placed at subinterval midpoints,
// and every frame carries the transcript of the turn it came from.

#ifndef STSVLCC_SAMPLER_HPP_
#define STSVLCC_SAMPLER_HPP_

#include <span>
#include <string>
#include <vector>

#include "stsvlcc/turns.hpp"

namespace stsvlcc {

inline constexpr int kFallbackTurn = -1;

enum class Placement { kMidpoint };

struct SamplerConfig {
  int total_frames = 10;
  Placement placement = Placement::kMidpoint;
  double fallback_window = 2.0;  // seconds either side of a fallback frame
};

struct FrameSample {
  int turn = kFallbackTurn;  // k, or kFallbackTurn
  int index = 0;             // t within the turn (or within the video)
  double timestamp = 0.0;
  std::string transcript;

  bool operator==(const FrameSample &) const = default;
};

struct SamplePlan {
  std::string video_id;
  std::vector<FrameSample> frames;
  bool used_fallback = false;

  bool operator==(const SamplePlan &) const = default;
};

/// Largest-remainder integerization of duration-proportional quotas.
/// Counts sum to `total`; remainder ties go to the smaller index.
/// Throws kEmptyDurations / kInvalidArgument.
std::vector<int> AllocateFrames(std::span<const double> durations, int total);

/// Midpoints of `count` equal-width subintervals of [start, end]. Throws
/// kInvalidArgument unless start < end and count >= 0.
std::vector<double> PlaceFrames(double start, double end, int count);

/// Speaking-turn plan; falls back to whole-video equidistant sampling when
/// the turn set is empty. `cues` feed the fallback transcript windows.
SamplePlan BuildPlan(const TurnSet &turns, std::span<const Cue> cues,
                     const SamplerConfig &config);

/// Whole-video equidistant plan, ignoring turns. Also the control baseline.
SamplePlan BuildEquidistantPlan(const std::string &video_id,
                                double video_duration,
                                std::span<const Cue> cues,
                                const SamplerConfig &config);

/// Concatenation of distinct per-turn (or per-window) transcripts in frame
/// order; the prompt context for every question on this video.
std::string PlanContextTranscript(const SamplePlan &plan);

}  // namespace stsvlcc

#endif  // STSVLCC_SAMPLER_HPP_
