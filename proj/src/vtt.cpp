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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>

#include "stsvlcc/corpus_io.hpp"

namespace stsvlcc {

namespace {

struct Line {
  std::string_view text;
  std::size_t number;
};

std::vector<Line> SplitLines(std::string_view doc) {
  std::vector<Line> lines;
  std::size_t number = 1;
  std::size_t pos = 0;
  while (pos <= doc.size()) {
    std::size_t nl = doc.find('\n', pos);
    if (nl == std::string_view::npos) nl = doc.size();
    std::string_view line = doc.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({line, number++});
    if (nl == doc.size()) break;
    pos = nl + 1;
  }
  return lines;
}

bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

bool AllDigits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

// "[hh:]mm:ss.ttt" -> integer milliseconds.
std::optional<std::int64_t> ParseTimestampMs(std::string_view ts) {
  std::size_t dot = ts.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  std::string_view frac = ts.substr(dot + 1);
  std::string_view hms = ts.substr(0, dot);
  if (frac.size() != 3 || !AllDigits(frac)) return std::nullopt;

  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t colon = hms.find(':', start);
    parts.push_back(hms.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 2 && parts.size() != 3) return std::nullopt;
  for (auto p : parts)
    if (!AllDigits(p)) return std::nullopt;

  auto to_int = [](std::string_view s) {
    std::int64_t v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
  };
  std::int64_t hours = 0, minutes, seconds;
  if (parts.size() == 3) {
    if (parts[0].size() < 2) return std::nullopt;
    hours = to_int(parts[0]);
    minutes = to_int(parts[1]);
    seconds = to_int(parts[2]);
  } else {
    minutes = to_int(parts[0]);
    seconds = to_int(parts[1]);
  }
  if (parts[parts.size() - 2].size() != 2 || parts.back().size() != 2)
    return std::nullopt;
  if (minutes > 59 || seconds > 59) return std::nullopt;
  return ((hours * 60 + minutes) * 60 + seconds) * 1000 + to_int(frac);
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string StripTags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_tag = false;
  for (char c : text) {
    if (in_tag) {
      if (c == '>') in_tag = false;
    } else if (c == '<') {
      in_tag = true;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string DecodeEntities(std::string_view text) {
  static constexpr std::pair<std::string_view, std::string_view> kEntities[] = {
      {"&amp;", "&"},   {"&lt;", "<"},   {"&gt;", ">"},
      {"&nbsp;", " "},  {"&lrm;", ""},   {"&rlm;", ""},
      {"&quot;", "\""}, {"&apos;", "'"},
  };
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    bool matched = false;
    if (text[i] == '&') {
      for (const auto &[name, value] : kEntities) {
        if (text.substr(i, name.size()) == name) {
          out += value;
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(text[i++]);
  }
  return out;
}

std::string EscapeText(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

Cue ParseTimingLine(const Line &line) {
  std::string_view s = line.text;
  std::size_t arrow = s.find("-->");
  auto fail = [&](const char *what) {
    throw Error(ErrorCode::kMalformedTimestamp,
                std::string(what) + ": '" + std::string(s) + "'", line.number);
  };
  std::string_view lhs = Trim(s.substr(0, arrow));
  std::string_view rest = Trim(s.substr(arrow + 3));
  std::size_t space = rest.find_first_of(" \t");
  std::string_view rhs = rest.substr(0, space);  // cue settings ignored

  auto start = ParseTimestampMs(lhs);
  auto end = ParseTimestampMs(rhs);
  if (!start || !end) fail("unparsable cue timing");
  if (*end <= *start) fail("cue end is not after its start");
  Cue cue;
  cue.start = static_cast<double>(*start) / 1000.0;
  cue.end = static_cast<double>(*end) / 1000.0;
  return cue;
}

bool StartsWithWord(std::string_view s, std::string_view word) {
  if (s.substr(0, word.size()) != word) return false;
  return s.size() == word.size() || s[word.size()] == ' ' ||
         s[word.size()] == '\t';
}

}  // namespace

std::string CollapseWhitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<Cue> ParseVtt(std::string_view document) {
  if (document.substr(0, 3) == "\xEF\xBB\xBF") document.remove_prefix(3);
  if (IsBlank(document))
    throw Error(ErrorCode::kEmptyDocument, "document has no content");

  std::vector<Line> lines = SplitLines(document);
  if (!StartsWithWord(lines[0].text, "WEBVTT"))
    throw Error(ErrorCode::kMalformedHeader,
                "missing WEBVTT signature line", 1);

  std::size_t i = 1;
  // Header block runs to the first blank line.
  while (i < lines.size() && !IsBlank(lines[i].text)) ++i;

  std::vector<Cue> cues;
  while (i < lines.size()) {
    while (i < lines.size() && IsBlank(lines[i].text)) ++i;
    if (i >= lines.size()) break;
    std::size_t block_begin = i;
    while (i < lines.size() && !IsBlank(lines[i].text)) ++i;
    std::size_t block_end = i;

    const Line &first = lines[block_begin];
    if (StartsWithWord(first.text, "NOTE") ||
        StartsWithWord(first.text, "STYLE") ||
        StartsWithWord(first.text, "REGION"))
      continue;

    std::size_t timing = block_begin;
    if (first.text.find("-->") == std::string_view::npos) {
      // Identifier line; timing must follow.
      timing = block_begin + 1;
      if (timing >= block_end ||
          lines[timing].text.find("-->") == std::string_view::npos) {
        const Line &bad = timing < block_end ? lines[timing] : first;
        throw Error(ErrorCode::kMalformedTimestamp,
                    "cue block without a timing line", bad.number);
      }
    }
    Cue cue = ParseTimingLine(lines[timing]);
    std::string payload;
    for (std::size_t j = timing + 1; j < block_end; ++j) {
      if (!payload.empty()) payload.push_back(' ');
      payload.append(lines[j].text);
    }
    cue.text = CollapseWhitespace(DecodeEntities(StripTags(payload)));
    cues.push_back(std::move(cue));
  }

  std::stable_sort(cues.begin(), cues.end(), [](const Cue &a, const Cue &b) {
    return a.start < b.start;
  });
  return cues;
}

std::string FormatVttTimestamp(double seconds) {
  auto ms = static_cast<std::int64_t>(std::llround(seconds * 1000.0));
  if (ms < 0) ms = 0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld.%03lld",
                static_cast<long long>(ms / 3600000),
                static_cast<long long>((ms / 60000) % 60),
                static_cast<long long>((ms / 1000) % 60),
                static_cast<long long>(ms % 1000));
  return buf;
}

std::string SerializeVtt(const std::vector<Cue> &cues) {
  std::string out = "WEBVTT\n";
  for (const Cue &cue : cues) {
    out += "\n";
    out += FormatVttTimestamp(cue.start);
    out += " --> ";
    out += FormatVttTimestamp(cue.end);
    out += "\n";
    out += EscapeText(cue.text);
    out += "\n";
  }
  return out;
}

}  // namespace stsvlcc
