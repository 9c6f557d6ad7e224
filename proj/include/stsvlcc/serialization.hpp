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

// JSON/JSONL forms of turns, sample plans and reports.
//   turns: {video_id, k, start, end, speakers, transcript}     one per turn
//   plans: {video_id, used_fallback, frames: [{k, t, timestamp, transcript}]}
// Timestamps are written at millisecond precision; fallback frames use k = -1.

#ifndef STSVLCC_SERIALIZATION_HPP_
#define STSVLCC_SERIALIZATION_HPP_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsvlcc/ablation.hpp"
#include "stsvlcc/qa_eval.hpp"
#include "stsvlcc/sampler.hpp"
#include "stsvlcc/turns.hpp"

namespace stsvlcc {

double RoundToMs(double seconds);

std::string TurnsToJsonl(const TurnSet &turns);
/// Groups turn lines by video_id; turns are re-sorted by k. Throws
/// kMalformedLine with the offending line number.
std::map<std::string, std::vector<SpeakingTurn>> ParseTurnsJsonl(std::string_view text);

nlohmann::json PlanToJson(const SamplePlan &plan);
std::string PlansToJsonl(const std::vector<SamplePlan> &plans);
PlanIndex ParsePlansJsonl(std::string_view text);

nlohmann::json EvalReportToJson(const EvalReport &report);
nlohmann::json AblationReportToJson(const AblationReport &report);

}  // namespace stsvlcc

#endif  // STSVLCC_SERIALIZATION_HPP_
