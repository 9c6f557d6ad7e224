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

// Planted-signal corpus. Each video has a few short speaking turns; the
// provider blends embed_text(gold answer) into frames inside those turns and
// nowhere else. Transcripts are neutral filler, so the signal is visual only.

#ifndef STSVLCC_TESTS_FIXTURE_HPP_
#define STSVLCC_TESTS_FIXTURE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stsvlcc/corpus_io.hpp"
#include "stsvlcc/embeddings.hpp"

namespace stsvlcc::testing {

struct FixtureOptions {
  std::uint64_t seed = 7;
  int videos = 200;
  std::string prefix = "fx";
  int dim = 64;
  int turns_min = 2;
  int turns_max = 2;
  double turn_fraction_min = 0.015;  // of the video duration, per turn
  double turn_fraction_max = 0.03;
  float weight = 0.6f;
};

struct FixtureVideo {
  VideoMeta meta;
  std::vector<DiarSegment> segments;
  std::vector<Cue> cues;
  std::vector<std::pair<double, double>> signal_intervals;
  QAInstance qa;
};

struct Fixture {
  FixtureOptions options;
  std::vector<FixtureVideo> videos;

  std::vector<QAInstance> instances() const;
  // Sum of signal interval lengths over duration, maximised over videos.
  double max_signal_coverage() const;
  // JSONL {video_id, start, end, text, weight}, one line per interval.
  std::string injections_jsonl() const;
  std::vector<Injection> injections(const SyntheticProvider &plain) const;
};

Fixture MakeFixture(const FixtureOptions &options);

// durations.txt, manifest.jsonl, inject.jsonl, rttm/<vid>.rttm, vtt/<vid>.vtt
void WriteFixture(const Fixture &fixture, const std::string &dir);

std::string RttmLines(const std::vector<DiarSegment> &segments);

}  // namespace stsvlcc::testing

#endif  // STSVLCC_TESTS_FIXTURE_HPP_
