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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "stsvlcc/corpus_io.hpp"
#include "test_util.hpp"

namespace stsvlcc {
namespace {

// --- WebVTT ----------------------------------------------------------------

TEST(ParseVtt, SingleCue) {
  auto cues = ParseVtt("WEBVTT\n\n00:00:01.000 --> 00:00:03.500\nhello there");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0], (Cue{1.0, 3.5, "hello there"}));
}

TEST(ParseVtt, HeaderOnlyIsEmptyList) {
  EXPECT_TRUE(ParseVtt("WEBVTT\n").empty());
  EXPECT_TRUE(ParseVtt("WEBVTT").empty());
  EXPECT_TRUE(ParseVtt("WEBVTT - title\nKind: captions\n\n").empty());
}

TEST(ParseVtt, VoiceTagStrippedAndLinesJoined) {
  auto cues = ParseVtt("WEBVTT\n\n00:00.000 --> 00:01.000\n<v Amy>hi</v>\nfriend\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0].text, "hi friend");
}

TEST(ParseVtt, EmptyDocumentIsDistinctError) {
  EXPECT_ERROR_CODE(ParseVtt(""), ErrorCode::kEmptyDocument);
  EXPECT_ERROR_CODE(ParseVtt("  \n\n"), ErrorCode::kEmptyDocument);
}

TEST(ParseVtt, MissingSignature) {
  EXPECT_ERROR_CODE(ParseVtt("00:00.000 --> 00:01.000\nhi\n"), ErrorCode::kMalformedHeader);
  EXPECT_ERROR_CODE(ParseVtt("WEBVTTX\n"), ErrorCode::kMalformedHeader);
}

TEST(ParseVtt, MalformedTimestampReportsLine) {
  try {
    ParseVtt("WEBVTT\n\n00:00.000 --> 00:01.000\nok\n\n00:0x.000 --> 00:02.000\nbad\n");
    FAIL() << "expected MalformedTimestamp";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedTimestamp);
    EXPECT_EQ(e.line(), 6u);
  }
}

TEST(ParseVtt, RejectsBadTimingShapes) {
  for (const char *timing : {"00:01.000 --> 00:00.500", "00:01.000 -> 00:02.000",
                             "00:01.000 --> ", "00:61.000 --> 01:02.000",
                             "1:00.000 --> 1:01.000", "00:00.00 --> 00:01.000"}) {
    std::string doc = std::string("WEBVTT\n\n") + timing + "\ntext\n";
    EXPECT_ERROR_CODE(ParseVtt(doc), ErrorCode::kMalformedTimestamp);
  }
}

TEST(ParseVtt, CueBlockWithoutTimingLine) {
  EXPECT_ERROR_CODE(ParseVtt("WEBVTT\n\nid-only\njust text\n"), ErrorCode::kMalformedTimestamp);
}

TEST(ParseVtt, MillisecondPrecisionAndHours) {
  auto cues = ParseVtt("WEBVTT\n\n01:02:03.004 --> 01:02:05.999\nx\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_DOUBLE_EQ(cues[0].start, 3723.004);
  EXPECT_DOUBLE_EQ(cues[0].end, 3725.999);
}

TEST(ParseVtt, SkipsNoteStyleRegionAndSettings) {
  auto cues = ParseVtt(
      "WEBVTT\n\nNOTE a comment\n\nSTYLE\n::cue { color: red }\n\nREGION\nid:r\n\n"
      "cue-1\n00:00.000 --> 00:01.000 align:start region:r\n<b>bold</b> &amp; plain\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0].text, "bold & plain");
}

TEST(ParseVtt, SortedStableByStart) {
  auto cues = ParseVtt(
      "WEBVTT\n\n00:05.000 --> 00:06.000\nc\n\n00:01.000 --> 00:03.000\na\n\n"
      "00:01.000 --> 00:02.000\nb\n");
  ASSERT_EQ(cues.size(), 3u);
  EXPECT_EQ(cues[0].text, "a");
  EXPECT_EQ(cues[1].text, "b");
  EXPECT_EQ(cues[2].text, "c");
}

TEST(ParseVtt, CrlfAndBom) {
  auto cues = ParseVtt("\xEF\xBB\xBFWEBVTT\r\n\r\n00:00.000 --> 00:01.000\r\nhey\r\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0].text, "hey");
}

TEST(ParseVtt, WhitespaceCollapsed) {
  auto cues = ParseVtt("WEBVTT\n\n00:00.000 --> 00:01.000\n  a \t b  \n   c\n");
  EXPECT_EQ(cues.at(0).text, "a b c");
}

TEST(SerializeVtt, EscapesAndHeaderOnly) {
  EXPECT_EQ(SerializeVtt({}), "WEBVTT\n");
  std::string doc = SerializeVtt({{0.0, 1.25, "a < b & c > d"}});
  EXPECT_NE(doc.find("00:00:00.000 --> 00:00:01.250"), std::string::npos);
  EXPECT_NE(doc.find("a &lt; b &amp; c &gt; d"), std::string::npos);
}

TEST(FormatVttTimestamp, Fields) {
  EXPECT_EQ(FormatVttTimestamp(0.0), "00:00:00.000");
  EXPECT_EQ(FormatVttTimestamp(3723.004), "01:02:03.004");
  EXPECT_EQ(FormatVttTimestamp(59.9996), "00:01:00.000");
}

TEST(VttProperty, RoundTripRandomCues) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> ms(0, 3'600'000), len(1, 20'000), words(1, 6), pick(0, 7);
  const char *vocab[] = {"hi", "a&b", "<x>", "q>p", "caf\xC3\xA9", "--", "ok", "&amp;"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Cue> cues;
    int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < n; ++i) {
      int s = ms(rng), e = s + len(rng);
      std::string text;
      for (int w = words(rng); w > 0; --w) text += std::string(text.empty() ? "" : " ") + vocab[pick(rng)];
      cues.push_back({s / 1000.0, e / 1000.0, text});
    }
    std::vector<Cue> parsed = ParseVtt(SerializeVtt(cues));
    std::vector<Cue> again = ParseVtt(SerializeVtt(parsed));
    ASSERT_EQ(parsed, again);
    std::stable_sort(cues.begin(), cues.end(),
                     [](const Cue &a, const Cue &b) { return a.start < b.start; });
    ASSERT_EQ(parsed.size(), cues.size());
    for (std::size_t i = 0; i < cues.size(); ++i) {
      EXPECT_EQ(parsed[i].start, cues[i].start);
      EXPECT_EQ(parsed[i].end, cues[i].end);
      EXPECT_EQ(parsed[i].text, cues[i].text);
    }
  }
}

TEST(VttProperty, FixtureCorpusIsTotalAndFixedPoint) {
  std::size_t files = 0;
  for (const auto &entry : std::filesystem::directory_iterator(STSVLCC_TEST_DATA_DIR "/vtt")) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<Cue> once = ParseVtt(ss.str());
    EXPECT_EQ(ParseVtt(SerializeVtt(once)), once) << entry.path();
    for (std::size_t i = 1; i < once.size(); ++i) EXPECT_LE(once[i - 1].start, once[i].start);
    ++files;
  }
  EXPECT_GE(files, 20u);
}

// --- RTTM ------------------------------------------------------------------

TEST(ParseRttm, SingleSpeakerLine) {
  RttmResult r = ParseRttm("SPEAKER vid1 1 0.50 2.00 <NA> <NA> spkA <NA> <NA>");
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_EQ(r.segments[0], (DiarSegment{"vid1", "spkA", 0.5, 2.0}));
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ParseRttm, EmptyDocument) {
  EXPECT_TRUE(ParseRttm("").segments.empty());
}

TEST(ParseRttm, NonSpeakerLinesSkipped) {
  RttmResult r = ParseRttm(
      "SPEAKER v 1 0.0 1.0 <NA> <NA> A <NA> <NA>\n"
      "SPKR-INFO v 1 <NA> <NA> <NA> unknown A <NA> <NA>\n"
      "SPEAKER v 1 2.0 1.0 <NA> <NA> B <NA> <NA>\n");
  ASSERT_EQ(r.segments.size(), 2u);
  EXPECT_EQ(r.segments[1].speaker, "B");
}

TEST(ParseRttm, NineFieldLinesAccepted) {
  EXPECT_EQ(ParseRttm("SPEAKER v 1 0.0 1.0 <NA> <NA> A <NA>\n").segments.size(), 1u);
}

TEST(ParseRttm, MalformedLinesCarryLineNumber) {
  for (const char *bad : {"SPEAKER v 1 0.0 1.0 <NA> <NA> A", "SPEAKER v 1 abc 1.0 <NA> <NA> A <NA> <NA>",
                          "SPEAKER v 1 0.0 1.0x <NA> <NA> A <NA> <NA>"}) {
    try {
      ParseRttm(std::string("SPEAKER v 1 0 1 <NA> <NA> A <NA> <NA>\n") + bad + "\n");
      ADD_FAILURE() << bad;
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedLine);
      EXPECT_EQ(e.line(), 2u);
    }
  }
}

TEST(ParseRttm, NonPositiveDurationIsWarning) {
  RttmResult r = ParseRttm(
      "SPEAKER v 1 0.0 0.0 <NA> <NA> A <NA> <NA>\n"
      "SPEAKER v 1 1.0 -2.0 <NA> <NA> A <NA> <NA>\n"
      "SPEAKER v 1 1.0 nan <NA> <NA> A <NA> <NA>\n"
      "SPEAKER v 1 -1.0 2.0 <NA> <NA> A <NA> <NA>\n"
      "SPEAKER v 1 3.0 1.0 <NA> <NA> B <NA> <NA>\n");
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_EQ(r.segments[0].speaker, "B");
  ASSERT_EQ(r.warnings.size(), 4u);
  EXPECT_EQ(r.warnings[0].line, 1u);
  EXPECT_EQ(r.warnings[3].line, 4u);
}

TEST(RttmProperty, PermutationCovariant) {
  std::mt19937_64 rng(9);
  std::vector<std::string> lines;
  for (int i = 0; i < 40; ++i) {
    std::ostringstream line;
    line << "SPEAKER v" << i % 3 << " 1 " << i * 0.25 << " " << 0.1 + i * 0.01
         << " <NA> <NA> s" << i % 5 << " <NA> <NA>";
    lines.push_back(line.str());
  }
  auto join = [](const std::vector<std::string> &ls) {
    std::string out;
    for (const auto &l : ls) out += l + "\n";
    return out;
  };
  std::vector<DiarSegment> base = ParseRttm(join(lines)).segments;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> perm(lines.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> shuffled;
    for (std::size_t p : perm) shuffled.push_back(lines[p]);
    std::vector<DiarSegment> got = ParseRttm(join(shuffled)).segments;
    ASSERT_EQ(got.size(), base.size());
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(got[i], base[perm[i]]);
  }
}

// --- Manifest ----------------------------------------------------------------

constexpr const char *kGoodLine =
    R"({"video_id":"v1","question":"why?","answers":["a","b","c","d"],"gold_index":2})";

TEST(LoadManifest, ValidInstance) {
  auto qa = LoadManifest(kGoodLine);
  ASSERT_EQ(qa.size(), 1u);
  EXPECT_EQ(qa[0].video_id, "v1");
  EXPECT_EQ(qa[0].gold_index, 2);
  EXPECT_EQ(qa[0].answers[3], "d");
  EXPECT_EQ(qa[0].line, 1u);
  EXPECT_FALSE(qa[0].qa_id.empty());
}

TEST(LoadManifest, ThreeAnswers) {
  EXPECT_ERROR_CODE(
      LoadManifest(R"({"video_id":"v","question":"q","answers":["a","b","c"],"gold_index":0})"),
      ErrorCode::kWrongAnswerCount);
}

TEST(LoadManifest, EmptyFile) {
  EXPECT_TRUE(LoadManifest("").empty());
  EXPECT_TRUE(LoadManifest("\n\n").empty());
}

TEST(LoadManifest, GoldOutOfRange) {
  for (const char *gold : {"4", "-1"}) {
    std::string line = std::string(R"({"video_id":"v","question":"q","answers":["a","b","c","d"],"gold_index":)") +
                       gold + "}";
    EXPECT_ERROR_CODE(LoadManifest(line), ErrorCode::kGoldIndexOutOfRange);
  }
}

TEST(LoadManifest, DuplicateIdsWithLineNumber) {
  std::string doc =
      R"({"qa_id":"x","video_id":"v","question":"q","answers":["a","b","c","d"],"gold_index":0})"
      "\n"
      R"({"qa_id":"x","video_id":"w","question":"q","answers":["a","b","c","d"],"gold_index":1})";
  try {
    LoadManifest(doc);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateQuestionId);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadManifest, MissingOrMistypedFields) {
  EXPECT_ERROR_CODE(LoadManifest("not json"), ErrorCode::kMalformedLine);
  EXPECT_ERROR_CODE(LoadManifest(R"({"question":"q","answers":["a","b","c","d"],"gold_index":0})"),
                    ErrorCode::kMalformedLine);
  EXPECT_ERROR_CODE(
      LoadManifest(R"({"video_id":"","question":"q","answers":["a","b","c","d"],"gold_index":0})"),
      ErrorCode::kMalformedLine);
  EXPECT_ERROR_CODE(
      LoadManifest(R"({"video_id":"v","question":"q","answers":["a","b","c","d"],"gold_index":"1"})"),
      ErrorCode::kMalformedLine);
}

TEST(LoadManifest, LinesPreserved) {
  std::string doc = std::string(kGoodLine) + "\n\n" +
                    R"({"video_id":"v2","question":"q","answers":["a","b","c","d"],"gold_index":0})";
  auto qa = LoadManifest(doc);
  ASSERT_EQ(qa.size(), 2u);
  EXPECT_EQ(qa[1].line, 3u);
  EXPECT_NE(qa[0].qa_id, qa[1].qa_id);
}

// --- Durations and text helpers ------------------------------------------------

TEST(ParseDurations, PairsAndComments) {
  auto v = ParseDurations("# video durations\nv1 12.5\n\nv2\t3\n");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].video_id, "v1");
  EXPECT_DOUBLE_EQ(v[0].duration, 12.5);
  EXPECT_DOUBLE_EQ(v[1].duration, 3.0);
}

TEST(ParseDurations, Rejects) {
  EXPECT_ERROR_CODE(ParseDurations("v1\n"), ErrorCode::kMalformedLine);
  EXPECT_ERROR_CODE(ParseDurations("v1 0\n"), ErrorCode::kMalformedLine);
  EXPECT_ERROR_CODE(ParseDurations("v1 -3\n"), ErrorCode::kMalformedLine);
  EXPECT_ERROR_CODE(ParseDurations("v1 abc\n"), ErrorCode::kMalformedLine);
}

TEST(TextHelpers, CollapseAndSplit) {
  EXPECT_EQ(CollapseWhitespace("  a\t\n b  "), "a b");
  EXPECT_EQ(CollapseWhitespace(""), "");
  EXPECT_EQ(SplitWhitespace(" x  y\tz "), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_TRUE(SplitWhitespace("   ").empty());
}

}  // namespace
}  // namespace stsvlcc
