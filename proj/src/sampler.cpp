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

#include "stsvlcc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace stsvlcc {

namespace {

// Quotas are compared on a 1e-9 grid so that remainders which are equal in
// exact arithmetic stay tied after floating-point rescaling.
constexpr double kRemainderGrid = 1e9;

}  // namespace

std::vector<int> AllocateFrames(std::span<const double> durations, int total) {
  if (durations.empty())
    throw Error(ErrorCode::kEmptyDurations, "no turn durations to apportion");
  if (total < 1)
    throw Error(ErrorCode::kInvalidArgument, "frame budget must be >= 1");
  double sum = 0.0;
  for (double d : durations) {
    if (!(d > 0.0) || !std::isfinite(d))
      throw Error(ErrorCode::kInvalidArgument,
                  "turn durations must be positive and finite");
    sum += d;
  }

  const std::size_t n = durations.size();
  std::vector<int> counts(n);
  std::vector<std::int64_t> remainder(n);
  int assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double quota = durations[k] * total / sum;
    double floor = std::floor(quota + 1.0 / kRemainderGrid);
    counts[k] = static_cast<int>(floor);
    remainder[k] = std::llround(std::max(0.0, quota - floor) * kRemainderGrid);
    assigned += counts[k];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return remainder[a] > remainder[b];
                   });
  int leftover = total - assigned;
  for (std::size_t i = 0; leftover > 0; i = (i + 1) % n, --leftover)
    ++counts[order[i]];
  return counts;
}

std::vector<double> PlaceFrames(double start, double end, int count) {
  if (!(start < end))
    throw Error(ErrorCode::kInvalidArgument, "interval start must precede end");
  if (count < 0) throw Error(ErrorCode::kInvalidArgument, "frame count must be >= 0");
  std::vector<double> out;
  out.reserve(count);
  const double width = end - start;
  for (int t = 0; t < count; ++t)
    out.push_back(start + width * (2.0 * t + 1.0) / (2.0 * count));
  return out;
}

SamplePlan BuildEquidistantPlan(const std::string &video_id,
                                double video_duration,
                                std::span<const Cue> cues,
                                const SamplerConfig &config) {
  if (config.total_frames < 1)
    throw Error(ErrorCode::kInvalidArgument, "total_frames must be >= 1");
  SamplePlan plan;
  plan.video_id = video_id;
  plan.used_fallback = true;
  std::vector<double> stamps =
      PlaceFrames(0.0, video_duration, config.total_frames);
  for (std::size_t t = 0; t < stamps.size(); ++t) {
    FrameSample frame;
    frame.turn = kFallbackTurn;
    frame.index = static_cast<int>(t);
    frame.timestamp = stamps[t];
    frame.transcript =
        CollectTranscript(cues, stamps[t] - config.fallback_window,
                          stamps[t] + config.fallback_window);
    plan.frames.push_back(std::move(frame));
  }
  return plan;
}

SamplePlan BuildPlan(const TurnSet &turns, std::span<const Cue> cues,
                     const SamplerConfig &config) {
  if (turns.turns.empty())
    return BuildEquidistantPlan(turns.video_id, turns.video_duration, cues,
                                config);
  if (config.total_frames < 1)
    throw Error(ErrorCode::kInvalidArgument, "total_frames must be >= 1");

  std::vector<double> durations;
  durations.reserve(turns.size());
  for (const SpeakingTurn &turn : turns.turns)
    durations.push_back(turn.duration());
  std::vector<int> counts = AllocateFrames(durations, config.total_frames);

  SamplePlan plan;
  plan.video_id = turns.video_id;
  for (std::size_t k = 0; k < turns.size(); ++k) {
    const SpeakingTurn &turn = turns.turns[k];
    std::vector<double> stamps = PlaceFrames(turn.start, turn.end, counts[k]);
    for (std::size_t t = 0; t < stamps.size(); ++t)
      plan.frames.push_back(
          {turn.index, static_cast<int>(t), stamps[t], turn.transcript});
  }
  return plan;
}

std::string PlanContextTranscript(const SamplePlan &plan) {
  std::string out;
  const FrameSample *prev = nullptr;
  for (const FrameSample &frame : plan.frames) {
    bool repeat = prev != nullptr &&
                  (frame.turn != kFallbackTurn ? frame.turn == prev->turn
                                               : frame.transcript ==
                                                     prev->transcript);
    prev = &frame;
    if (repeat || frame.transcript.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += frame.transcript;
  }
  return out;
}

}  // namespace stsvlcc
