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

#include "fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stsvlcc::testing {

namespace {

constexpr std::array<const char *, 32> kWords = {
    "okay",   "so",     "well",   "right",  "maybe", "think",  "really", "just",
    "there",  "what",   "about",  "people", "time",  "know",   "mean",   "like",
    "going",  "little", "thing",  "today",  "back",  "yeah",   "sure",   "kind",
    "always", "never",  "around", "before", "after", "enough", "even",   "still"};

double Ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

std::string Filler(std::mt19937_64 &rng, int words) {
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += kWords[pick(rng)];
  }
  return out;
}

}  // namespace

Fixture MakeFixture(const FixtureOptions &options) {
  Fixture fx;
  fx.options = options;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  for (int v = 0; v < options.videos; ++v) {
    FixtureVideo video;
    char id[64];
    std::snprintf(id, sizeof(id), "%s%04d", options.prefix.c_str(), v);
    video.meta = {id, Ms(uniform(60.0, 120.0))};
    const double duration = video.meta.duration;

    std::uniform_int_distribution<int> turn_count(options.turns_min, options.turns_max);
    const int n = turn_count(rng);
    const double slot = (duration - 4.0) / n;
    for (int k = 0; k < n; ++k) {
      const double length =
          duration * uniform(options.turn_fraction_min, options.turn_fraction_max);
      const double start = Ms(2.0 + k * slot + uniform(0.0, slot - length));
      const double end = Ms(start + length);
      // Two segments separated by a pause shorter than the default merge gap.
      const double split = Ms(start + length * uniform(0.35, 0.65));
      const double resume = Ms(split + 0.2);
      const std::string first = (k % 2 == 0) ? "spk_a" : "spk_b";
      const std::string second = unit(rng) < 0.5 ? first : "spk_c";
      video.segments.push_back({id, first, start, Ms(split - start)});
      video.segments.push_back({id, second, resume, Ms(end - resume)});
      video.cues.push_back({start, split, Filler(rng, 5)});
      video.cues.push_back({resume, end, Filler(rng, 4)});
      video.signal_intervals.emplace_back(start, end);
    }

    QAInstance &qa = video.qa;
    qa.qa_id = std::string(id) + ":q";
    qa.video_id = id;
    qa.question = "what is really going on " + Filler(rng, 3);
    for (int j = 0; j < 4; ++j)
      qa.answers[j] = std::string(id) + " option " + std::to_string(j) + " " + Filler(rng, 3);
    qa.gold_index = std::uniform_int_distribution<int>(0, 3)(rng);
    fx.videos.push_back(std::move(video));
  }
  return fx;
}

std::vector<QAInstance> Fixture::instances() const {
  std::vector<QAInstance> out;
  for (const FixtureVideo &v : videos) out.push_back(v.qa);
  return out;
}

double Fixture::max_signal_coverage() const {
  double worst = 0.0;
  for (const FixtureVideo &v : videos) {
    double covered = 0.0;
    for (const auto &[s, e] : v.signal_intervals) covered += e - s;
    worst = std::max(worst, covered / v.meta.duration);
  }
  return worst;
}

std::string Fixture::injections_jsonl() const {
  std::string out;
  for (const FixtureVideo &v : videos)
    for (const auto &[s, e] : v.signal_intervals) {
      nlohmann::json line = {{"video_id", v.meta.video_id},
                             {"start", s},
                             {"end", e},
                             {"text", v.qa.answers[v.qa.gold_index]},
                             {"weight", options.weight}};
      out += line.dump() + "\n";
    }
  return out;
}

std::vector<Injection> Fixture::injections(const SyntheticProvider &plain) const {
  std::vector<Injection> out;
  for (const FixtureVideo &v : videos)
    for (const auto &[s, e] : v.signal_intervals)
      out.push_back({v.meta.video_id, s, e,
                     plain.embed_text(v.qa.answers[v.qa.gold_index]).values,
                     options.weight});
  return out;
}

std::string RttmLines(const std::vector<DiarSegment> &segments) {
  std::string out;
  char line[256];
  for (const DiarSegment &s : segments) {
    std::snprintf(line, sizeof(line), "SPEAKER %s 1 %.3f %.3f <NA> <NA> %s <NA> <NA>\n",
                  s.file_id.c_str(), s.start, s.duration, s.speaker.c_str());
    out += line;
  }
  return out;
}

void WriteFixture(const Fixture &fixture, const std::string &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "rttm");
  fs::create_directories(fs::path(dir) / "vtt");
  auto write = [](const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  };
  std::string durations, manifest;
  char line[128];
  for (const FixtureVideo &v : fixture.videos) {
    std::snprintf(line, sizeof(line), "%s %.3f\n", v.meta.video_id.c_str(), v.meta.duration);
    durations += line;
    nlohmann::json qa = {{"qa_id", v.qa.qa_id},
                         {"video_id", v.qa.video_id},
                         {"question", v.qa.question},
                         {"answers", v.qa.answers},
                         {"gold_index", v.qa.gold_index}};
    manifest += qa.dump() + "\n";
    write(fs::path(dir) / "rttm" / (v.meta.video_id + ".rttm"), RttmLines(v.segments));
    write(fs::path(dir) / "vtt" / (v.meta.video_id + ".vtt"), SerializeVtt(v.cues));
  }
  write(fs::path(dir) / "durations.txt", durations);
  write(fs::path(dir) / "manifest.jsonl", manifest);
  write(fs::path(dir) / "inject.jsonl", fixture.injections_jsonl());
}

}  // namespace stsvlcc::testing
