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

#include "stsvlcc/serialization.hpp"

#include <algorithm>
#include <cmath>

namespace stsvlcc {

using nlohmann::json;

double RoundToMs(double seconds) {
  return static_cast<double>(std::llround(seconds * 1000.0)) / 1000.0;
}

namespace {

template <typename Fn>
void ForEachJsonLine(std::string_view text, Fn &&fn) {
  std::size_t number = 1, pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (CollapseWhitespace(line).empty()) {
      ++number;
      continue;
    }
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
      throw Error(ErrorCode::kMalformedLine, "not a JSON object", number);
    try {
      fn(obj, number);
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kMalformedLine, e.what(), number);
    }
    ++number;
  }
}

}  // namespace

std::string TurnsToJsonl(const TurnSet &turns) {
  std::string out;
  for (const SpeakingTurn &turn : turns.turns) {
    json line = {{"video_id", turns.video_id},
                 {"k", turn.index},
                 {"start", RoundToMs(turn.start)},
                 {"end", RoundToMs(turn.end)},
                 {"speakers", turn.speakers},
                 {"transcript", turn.transcript}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::map<std::string, std::vector<SpeakingTurn>> ParseTurnsJsonl(std::string_view text) {
  std::map<std::string, std::vector<SpeakingTurn>> out;
  ForEachJsonLine(text, [&](const json &obj, std::size_t line) {
    SpeakingTurn turn;
    turn.index = obj.at("k").get<int>();
    turn.start = obj.at("start").get<double>();
    turn.end = obj.at("end").get<double>();
    for (const auto &s : obj.at("speakers")) turn.speakers.insert(s.get<std::string>());
    turn.transcript = obj.at("transcript").get<std::string>();
    if (!(turn.end > turn.start))
      throw Error(ErrorCode::kMalformedLine, "turn end must exceed start", line);
    out[obj.at("video_id").get<std::string>()].push_back(std::move(turn));
  });
  for (auto &[video, turns] : out)
    std::sort(turns.begin(), turns.end(),
              [](const SpeakingTurn &a, const SpeakingTurn &b) { return a.index < b.index; });
  return out;
}

json PlanToJson(const SamplePlan &plan) {
  json frames = json::array();
  for (const FrameSample &f : plan.frames)
    frames.push_back({{"k", f.turn},
                      {"t", f.index},
                      {"timestamp", RoundToMs(f.timestamp)},
                      {"transcript", f.transcript}});
  return {{"video_id", plan.video_id},
          {"used_fallback", plan.used_fallback},
          {"frames", std::move(frames)}};
}

std::string PlansToJsonl(const std::vector<SamplePlan> &plans) {
  std::string out;
  for (const SamplePlan &plan : plans) {
    out += PlanToJson(plan).dump();
    out += '\n';
  }
  return out;
}

PlanIndex ParsePlansJsonl(std::string_view text) {
  PlanIndex out;
  ForEachJsonLine(text, [&](const json &obj, std::size_t line) {
    SamplePlan plan;
    plan.video_id = obj.at("video_id").get<std::string>();
    plan.used_fallback = obj.at("used_fallback").get<bool>();
    for (const auto &f : obj.at("frames")) {
      FrameSample frame;
      frame.turn = f.at("k").get<int>();
      frame.index = f.at("t").get<int>();
      frame.timestamp = f.at("timestamp").get<double>();
      frame.transcript = f.at("transcript").get<std::string>();
      plan.frames.push_back(std::move(frame));
    }
    if (out.count(plan.video_id) != 0)
      throw Error(ErrorCode::kMalformedLine,
                  "duplicate plan for video '" + plan.video_id + "'", line);
    std::string key = plan.video_id;
    out.emplace(std::move(key), std::move(plan));
  });
  return out;
}

json EvalReportToJson(const EvalReport &report) {
  json per_video = json::object();
  for (const auto &[video, tally] : report.per_video)
    per_video[video] = {{"n", tally.n},
                        {"correct", tally.correct},
                        {"accuracy", tally.n == 0 ? 0.0
                                                  : static_cast<double>(tally.correct) /
                                                        static_cast<double>(tally.n)}};
  json instances = json::array();
  json skipped = json::array();
  for (const InstanceResult &r : report.instances) {
    if (r.skipped) {
      skipped.push_back({{"qa_id", r.qa_id}, {"video_id", r.video_id}, {"reason", r.skip_reason}});
      continue;
    }
    json p = json::array();
    for (const ScoreRecord &s : r.scores) p.push_back(s.p_yes);
    instances.push_back({{"qa_id", r.qa_id},
                         {"gold", r.gold},
                         {"predicted", r.predicted},
                         {"p_yes", std::move(p)}});
  }
  return {{"n", report.n},
          {"correct", report.correct},
          {"skipped", report.skipped},
          {"accuracy", report.accuracy},
          {"per_video", std::move(per_video)},
          {"instances", std::move(instances)},
          {"skipped_instances", std::move(skipped)}};
}

json AblationReportToJson(const AblationReport &report) {
  auto optional = [](const std::optional<double> &v) -> json {
    return v ? json(*v) : json(nullptr);
  };
  return {{"unit", report.unit == AccuracyUnit::kPercent ? "percent" : "fraction"},
          {"acc",
           {{"base", report.acc_base},
            {"defaced", optional(report.acc_defaced)},
            {"blank", report.acc_blank},
            {"gibberish", report.acc_gibberish}}},
          {"deltas",
           {{"d1", optional(report.delta1)}, {"d2", report.delta2}, {"d3", report.delta3}}}};
}

}  // namespace stsvlcc
