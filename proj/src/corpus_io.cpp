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

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "stsvlcc/corpus_io.hpp"

namespace stsvlcc {

namespace {

template <typename Fn>
void ForEachLine(std::string_view doc, Fn &&fn) {
  std::size_t number = 1;
  std::size_t pos = 0;
  while (pos < doc.size()) {
    std::size_t nl = doc.find('\n', pos);
    if (nl == std::string_view::npos) nl = doc.size();
    std::string_view line = doc.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, number++);
    pos = nl + 1;
  }
}

// strtod accepts "nan"/"inf", which RTTM treats as a (bad) value rather than
// a malformed field.
bool ParseReal(const std::string &s, double *out) {
  if (s.empty()) return false;
  char *end = nullptr;
  *out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

RttmResult ParseRttm(std::string_view document) {
  RttmResult result;
  ForEachLine(document, [&](std::string_view line, std::size_t number) {
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.empty() || fields[0].rfind(";;", 0) == 0) return;
    if (fields[0] != "SPEAKER") return;
    // NIST RTTM has 10 fields; older emitters omit the trailing one.
    if (fields.size() != 10 && fields.size() != 9)
      throw Error(ErrorCode::kMalformedLine,
                  "expected 9 or 10 fields, got " +
                      std::to_string(fields.size()),
                  number);
    double onset = 0.0, duration = 0.0;
    if (!ParseReal(fields[3], &onset))
      throw Error(ErrorCode::kMalformedLine,
                  "non-numeric onset '" + fields[3] + "'", number);
    if (!ParseReal(fields[4], &duration))
      throw Error(ErrorCode::kMalformedLine,
                  "non-numeric duration '" + fields[4] + "'", number);
    if (!std::isfinite(duration) || duration <= 0.0) {
      result.warnings.push_back(
          {number, "segment with non-positive duration skipped"});
      return;
    }
    if (!std::isfinite(onset) || onset < 0.0) {
      result.warnings.push_back({number, "segment with negative onset skipped"});
      return;
    }
    result.segments.push_back({fields[1], fields[7], onset, duration});
  });
  return result;
}

std::vector<QAInstance> LoadManifest(std::string_view document) {
  using nlohmann::json;
  std::vector<QAInstance> out;
  std::set<std::string> seen_ids;
  ForEachLine(document, [&](std::string_view line, std::size_t number) {
    if (CollapseWhitespace(line).empty()) return;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object())
      throw Error(ErrorCode::kMalformedLine, "not a JSON object", number);

    auto require_string = [&](const char *key) {
      auto it = obj.find(key);
      if (it == obj.end() || !it->is_string())
        throw Error(ErrorCode::kMalformedLine,
                    std::string("missing string field '") + key + "'", number);
      return it->get<std::string>();
    };

    QAInstance qa;
    qa.line = number;
    qa.video_id = require_string("video_id");
    if (qa.video_id.empty())
      throw Error(ErrorCode::kMalformedLine, "empty video_id", number);
    qa.question = require_string("question");

    auto answers = obj.find("answers");
    if (answers == obj.end() || !answers->is_array())
      throw Error(ErrorCode::kMalformedLine, "missing array 'answers'", number);
    if (answers->size() != kAnswersPerQuestion)
      throw Error(ErrorCode::kWrongAnswerCount,
                  "expected 4 answers, got " + std::to_string(answers->size()),
                  number);
    for (std::size_t i = 0; i < kAnswersPerQuestion; ++i) {
      if (!(*answers)[i].is_string())
        throw Error(ErrorCode::kMalformedLine, "answer is not a string",
                    number);
      qa.answers[i] = (*answers)[i].get<std::string>();
    }

    auto gold = obj.find("gold_index");
    if (gold == obj.end() || !gold->is_number_integer())
      throw Error(ErrorCode::kMalformedLine, "missing integer 'gold_index'",
                  number);
    auto gold_value = gold->get<long long>();
    if (gold_value < 0 || gold_value >= static_cast<long long>(kAnswersPerQuestion))
      throw Error(ErrorCode::kGoldIndexOutOfRange,
                  "gold_index " + std::to_string(gold_value), number);
    qa.gold_index = static_cast<int>(gold_value);

    auto id = obj.find("qa_id");
    if (id == obj.end()) id = obj.find("id");
    if (id != obj.end()) {
      qa.qa_id = id->is_string() ? id->get<std::string>() : id->dump();
      if (!seen_ids.insert(qa.qa_id).second)
        throw Error(ErrorCode::kDuplicateQuestionId,
                    "duplicate id '" + qa.qa_id + "'", number);
    } else {
      qa.qa_id = qa.video_id + "#" + std::to_string(number);
    }
    out.push_back(std::move(qa));
  });
  return out;
}

std::vector<VideoMeta> ParseDurations(std::string_view document) {
  std::vector<VideoMeta> out;
  ForEachLine(document, [&](std::string_view line, std::size_t number) {
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.empty() || fields[0][0] == '#') return;
    double duration = 0.0;
    if (fields.size() != 2 || !ParseReal(fields[1], &duration))
      throw Error(ErrorCode::kMalformedLine,
                  "expected '<video_id> <seconds>'", number);
    if (!std::isfinite(duration) || duration <= 0.0)
      throw Error(ErrorCode::kMalformedLine, "duration must be positive",
                  number);
    out.push_back({fields[0], duration});
  });
  return out;
}

}  // namespace stsvlcc
