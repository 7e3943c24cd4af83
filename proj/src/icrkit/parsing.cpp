// Copyright 2026 The icrkit Authors.
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

#include "icrkit/parsing.hpp"

#include <algorithm>
#include <charconv>
#include <climits>
#include <string>

#include "icrkit/error.hpp"
#include "icrkit/matching.hpp"
#include "icrkit/text.hpp"

namespace icrkit::parsing {

namespace {

constexpr std::string_view kAnswerMarkers[] = {
    "The correct answer is", "The answer is:", "Answer:"};
constexpr std::string_view kIdsHeader = "Relevant Document IDs:";
constexpr std::string_view kContentsHeader = "Relevant documents:";

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

bool IsHorizontalSpace(char c) { return c == ' ' || c == '\t' || c == '\r'; }

size_t SkipHorizontalSpace(std::string_view s, size_t pos) {
  while (pos < s.size() && IsHorizontalSpace(s[pos])) ++pos;
  return pos;
}

// Rest of the line starting at pos; when that is blank, the next non-blank
// line instead.
std::string_view RestOfLineOrNext(std::string_view s, size_t pos) {
  size_t nl = s.find('\n', pos);
  std::string_view line = text::Trim(
      s.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                 : nl - pos));
  while (line.empty() && nl != std::string_view::npos) {
    const size_t start = nl + 1;
    nl = s.find('\n', start);
    line = text::Trim(s.substr(
        start, nl == std::string_view::npos ? std::string_view::npos
                                            : nl - start));
  }
  return line;
}

struct IdDeclaration {
  bool found = false;
  bool malformed = false;
  std::set<int> ids;
};

// Parses one id-list line: tags separated by commas/whitespace.
IdDeclaration ParseIdLine(std::string_view line, Diagnostics* diag) {
  IdDeclaration decl;
  decl.found = true;
  const auto tags = FindTags(line);
  if (tags.empty()) {
    decl.malformed = true;
    if (diag) diag->notes.emplace_back("id line has no [DOC i] tags");
    return decl;
  }
  bool sentinel = false;
  bool tolerated = false;
  bool extra_text = false;
  size_t prev_end = 0;
  for (size_t k = 0; k < tags.size(); ++k) {
    const auto& t = tags[k];
    const std::string_view gap = line.substr(prev_end, t.begin - prev_end);
    const std::string_view canonical_gap = k == 0 ? "" : ", ";
    if (gap != canonical_gap) {
      const bool only_sep = std::all_of(gap.begin(), gap.end(), [](char c) {
        return c == ',' || IsAsciiSpace(c);
      });
      if (only_sep && (k > 0 || text::Trim(gap).empty())) {
        tolerated = true;
      } else {
        extra_text = true;
      }
    }
    if (!t.canonical) tolerated = true;
    prev_end = t.end;
    if (t.index == -1) {
      sentinel = true;
    } else if (t.index < 0 || t.index > INT_MAX) {
      decl.malformed = true;
    } else {
      decl.ids.insert(static_cast<int>(t.index));
    }
  }
  const std::string_view tail = text::Trim(line.substr(prev_end));
  if (!tail.empty() && tail != "." && tail != ",") extra_text = true;
  if (sentinel && !decl.ids.empty()) decl.malformed = true;
  if (diag) {
    if (tolerated) diag->notes.emplace_back("id list whitespace tolerated");
    if (extra_text) diag->notes.emplace_back("id line has extra text");
  }
  if (decl.malformed) decl.ids.clear();
  return decl;
}

bool IsBareTagLine(std::string_view line) {
  const auto tags = FindTags(line);
  if (tags.empty()) return false;
  size_t prev = 0;
  for (const auto& t : tags) {
    for (size_t i = prev; i < t.begin; ++i) {
      if (line[i] != ',' && !IsAsciiSpace(line[i])) return false;
    }
    prev = t.end;
  }
  const std::string_view tail = text::Trim(line.substr(prev));
  return tail.empty() || tail == "." || tail == ",";
}

struct ContentSection {
  bool header_found = false;
  std::map<int, std::string> blocks;
};

ContentSection ParseContentSection(std::string_view y, Diagnostics* diag) {
  ContentSection out;
  const size_t header = text::FindNoCase(y, kContentsHeader);
  if (header == std::string_view::npos) return out;
  out.header_found = true;
  size_t begin = header + kContentsHeader.size();
  size_t end = y.size();
  if (const auto marker = FindLastAnswerMarker(y);
      marker && marker->begin >= begin) {
    end = marker->begin;
  }
  const std::string_view section = y.substr(begin, end - begin);

  // Block boundaries are tags that open a line.
  struct Opener {
    DocTag tag;
    size_t line_begin;
  };
  std::vector<Opener> openers;
  size_t line_start = 0;
  while (line_start <= section.size()) {
    const size_t first = SkipHorizontalSpace(section, line_start);
    if (auto tag = MatchTagAt(section, first)) {
      openers.push_back({*tag, line_start});
    }
    const size_t nl = section.find('\n', line_start);
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  for (size_t k = 0; k < openers.size(); ++k) {
    const size_t body_begin = openers[k].tag.end;
    const size_t body_end =
        k + 1 < openers.size() ? openers[k + 1].line_begin : section.size();
    const std::string body(
        text::Trim(section.substr(body_begin, body_end - body_begin)));
    const long long idx = openers[k].tag.index;
    if (idx < 0 || idx > INT_MAX) {
      if (diag) diag->flags.Set(FormatFlag::kMalformedIds);
      continue;
    }
    const auto [it, inserted] = out.blocks.emplace(static_cast<int>(idx), body);
    if (!inserted && diag) {
      diag->notes.push_back("duplicate content block for [DOC " +
                            std::to_string(idx) + "]; first kept");
    }
  }
  if (out.blocks.empty() && diag) diag->flags.Set(FormatFlag::kEmptySections);
  return out;
}

IdDeclaration FindIdDeclaration(std::string_view y, Diagnostics* diag) {
  // Content-reproduction outputs declare their ids through the block tags.
  {
    Diagnostics scratch;
    const auto section = ParseContentSection(y, &scratch);
    if (section.header_found && !section.blocks.empty()) {
      IdDeclaration decl;
      decl.found = true;
      if (scratch.flags.Has(FormatFlag::kMalformedIds)) {
        decl.malformed = true;
        return decl;
      }
      for (const auto& [idx, body] : section.blocks) decl.ids.insert(idx);
      return decl;
    }
  }
  if (const size_t pos = text::RFindNoCase(y, kIdsHeader);
      pos != std::string_view::npos) {
    return ParseIdLine(RestOfLineOrNext(y, pos + kIdsHeader.size()), diag);
  }
  for (const auto line : text::SplitLines(y)) {
    if (IsBareTagLine(line)) return ParseIdLine(text::Trim(line), diag);
  }
  return {};
}

}  // namespace

std::string_view FlagName(FormatFlag f) {
  switch (f) {
    case FormatFlag::kNoAnswerMarker: return "no_answer_marker";
    case FormatFlag::kMalformedIds: return "malformed_ids";
    case FormatFlag::kOverlongQuote: return "overlong_quote";
    case FormatFlag::kEmptySections: return "empty_sections";
  }
  return "unknown";
}

std::vector<std::string> FormatFlags::Names() const {
  std::vector<std::string> out;
  for (auto f : {FormatFlag::kNoAnswerMarker, FormatFlag::kMalformedIds,
                 FormatFlag::kOverlongQuote, FormatFlag::kEmptySections}) {
    if (Has(f)) out.emplace_back(FlagName(f));
  }
  return out;
}

std::optional<DocTag> MatchTagAt(std::string_view s, size_t pos) {
  if (pos >= s.size() || s[pos] != '[') return std::nullopt;
  size_t i = pos + 1;
  const size_t after_bracket = i;
  while (i < s.size() && IsHorizontalSpace(s[i])) ++i;
  bool canonical = i == after_bracket;
  if (s.size() - i < 3 || text::AsciiLower(s.substr(i, 3)) != "doc") {
    return std::nullopt;
  }
  if (s.substr(i, 3) != "DOC") canonical = false;
  i += 3;
  const size_t before_num = i;
  while (i < s.size() && IsHorizontalSpace(s[i])) ++i;
  if (i - before_num != 1 || s[before_num] != ' ') canonical = false;
  const size_t num_begin = i;
  if (i < s.size() && s[i] == '-') ++i;
  const size_t digits_begin = i;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i == digits_begin) return std::nullopt;
  const size_t num_end = i;
  while (i < s.size() && IsHorizontalSpace(s[i])) ++i;
  if (i != num_end) canonical = false;
  if (i >= s.size() || s[i] != ']') return std::nullopt;
  DocTag tag;
  tag.begin = pos;
  tag.end = i + 1;
  tag.canonical = canonical;
  const auto res = std::from_chars(s.data() + num_begin, s.data() + num_end,
                                   tag.index);
  if (res.ec != std::errc()) tag.index = LLONG_MIN;  // overflow: malformed
  return tag;
}

std::vector<DocTag> FindTags(std::string_view s) {
  std::vector<DocTag> out;
  size_t pos = s.find('[');
  while (pos != std::string_view::npos) {
    if (auto tag = MatchTagAt(s, pos)) {
      out.push_back(*tag);
      pos = s.find('[', tag->end);
    } else {
      pos = s.find('[', pos + 1);
    }
  }
  return out;
}

std::optional<MarkerHit> FindLastAnswerMarker(std::string_view y) {
  std::optional<MarkerHit> best;
  for (const auto marker : kAnswerMarkers) {
    const size_t pos = text::RFindNoCase(y, marker);
    if (pos == std::string_view::npos) continue;
    const MarkerHit hit{pos, pos + marker.size()};
    if (!best || hit.begin > best->begin ||
        (hit.begin == best->begin && hit.end > best->end)) {
      best = hit;
    }
  }
  return best;
}

std::string ExtractAnswer(std::string_view y, Diagnostics* diag) {
  const auto marker = FindLastAnswerMarker(y);
  if (!marker) {
    if (diag) diag->flags.Set(FormatFlag::kNoAnswerMarker);
    return {};
  }
  size_t pos = SkipHorizontalSpace(y, marker->end);
  if (pos < y.size() && y[pos] == ':') ++pos;
  return std::string(RestOfLineOrNext(y, pos));
}

std::set<int> ExtractDocIds(std::string_view y, Diagnostics* diag) {
  const auto decl = FindIdDeclaration(y, diag);
  if (!decl.found || decl.malformed) {
    if (diag) diag->flags.Set(FormatFlag::kMalformedIds);
    return {};
  }
  return decl.ids;
}

std::map<int, std::string> ExtractContents(std::string_view y,
                                           Diagnostics* diag) {
  auto section = ParseContentSection(y, diag);
  if (!section.header_found) {
    if (diag) diag->flags.Set(FormatFlag::kEmptySections);
    return {};
  }
  return std::move(section.blocks);
}

std::vector<std::string> ExtractQuotes(std::string_view y, Diagnostics* diag,
                                       size_t max_quote_tokens) {
  constexpr std::string_view kOpenCurly = "“";
  constexpr std::string_view kCloseCurly = "”";
  std::vector<std::string> quotes;
  for (std::string_view line : text::SplitLines(y)) {
    line = text::Trim(line);
    if (line.starts_with("- ") || line.starts_with("* ")) {
      line = text::Trim(line.substr(2));
    }
    if (line.size() < 5 || text::AsciiLower(line.substr(0, 5)) != "quote") {
      continue;
    }
    size_t i = SkipHorizontalSpace(line, 5);
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
    i = SkipHorizontalSpace(line, i);
    if (i >= line.size() || line[i] != ':') continue;
    i = SkipHorizontalSpace(line, i + 1);
    size_t open_len = 0;
    if (i < line.size() && line[i] == '"') {
      open_len = 1;
    } else if (line.substr(i).starts_with(kOpenCurly)) {
      open_len = kOpenCurly.size();
    } else {
      if (diag) diag->notes.emplace_back("quote line without opening quote");
      continue;
    }
    const size_t body = i + open_len;
    const size_t straight = line.rfind('"');
    const size_t curly = line.rfind(kCloseCurly);
    size_t close = std::string_view::npos;
    if (straight != std::string_view::npos && straight >= body) close = straight;
    if (curly != std::string_view::npos && curly >= body &&
        (close == std::string_view::npos || curly > close)) {
      close = curly;
    }
    if (close == std::string_view::npos) {
      if (diag) diag->notes.emplace_back("unterminated quote skipped");
      continue;
    }
    std::string quote(line.substr(body, close - body));
    if (diag && matching::TokenCount(quote) > max_quote_tokens) {
      diag->flags.Set(FormatFlag::kOverlongQuote);
    }
    quotes.push_back(std::move(quote));
  }
  return quotes;
}

std::set<int> ExtractCitations(std::string_view y) {
  std::set<int> out;
  for (const auto& t : FindTags(y)) {
    if (t.index >= 0 && t.index <= INT_MAX) out.insert(static_cast<int>(t.index));
  }
  return out;
}

JudgeVerdict ParseJudgeVerdict(std::string_view input) {
  int values[3] = {-1, -1, -1};
  size_t pos = 0;
  while ((pos = input.find("boxed", pos)) != std::string_view::npos) {
    size_t i = SkipHorizontalSpace(input, pos + 5);
    pos += 5;
    if (i >= input.size() || input[i] != '{') continue;
    const size_t close = input.find('}', i + 1);
    if (close == std::string_view::npos) break;
    const std::string_view inner = text::Trim(input.substr(i + 1, close - i - 1));
    pos = close + 1;
    if (inner.size() < 9 || text::AsciiLower(inner.substr(0, 9)) != "criterion") {
      continue;
    }
    size_t k = SkipHorizontalSpace(inner, 9);
    int number = 0;
    const auto num = std::from_chars(inner.data() + k, inner.data() + inner.size(),
                                     number);
    if (num.ec != std::errc()) {
      throw Error(ErrorCode::kParse, "criterion box without a number");
    }
    k = SkipHorizontalSpace(inner, static_cast<size_t>(num.ptr - inner.data()));
    if (k >= inner.size() || inner[k] != ':') {
      throw Error(ErrorCode::kParse, "criterion box without ':'");
    }
    const std::string_view value = text::Trim(inner.substr(k + 1));
    if (number < 1 || number > 3) {
      throw Error(ErrorCode::kParse,
                  "unexpected criterion " + std::to_string(number));
    }
    if (value != "0" && value != "1") {
      throw Error(ErrorCode::kParse, "criterion " + std::to_string(number) +
                                         " value must be 0 or 1, got '" +
                                         std::string(value) + "'");
    }
    if (values[number - 1] != -1) {
      throw Error(ErrorCode::kParse,
                  "duplicate criterion " + std::to_string(number));
    }
    values[number - 1] = value == "1" ? 1 : 0;
  }
  for (int c = 0; c < 3; ++c) {
    if (values[c] == -1) {
      throw Error(ErrorCode::kParse,
                  "missing criterion " + std::to_string(c + 1));
    }
  }
  return JudgeVerdict{values[0], values[1], values[2], std::string(input)};
}

std::vector<DocSpan> ExtractDocSpans(std::string_view context) {
  std::vector<DocSpan> spans;
  if (context.empty()) return spans;
  auto tag_for = [](int i) { return "[DOC " + std::to_string(i) + "] "; };
  std::string tag = tag_for(0);
  if (!context.starts_with(tag)) {
    throw Error(ErrorCode::kParse, "context does not start with [DOC 0]");
  }
  size_t body = tag.size();
  for (int i = 0;; ++i) {
    const std::string next = "\n" + tag_for(i + 1);
    const size_t at = context.find(next, body);
    if (at == std::string_view::npos) {
      spans.push_back({i, body, context.size()});
      break;
    }
    spans.push_back({i, body, at});
    body = at + next.size();
  }
  return spans;
}

ParsedOutput ParseOutput(std::string_view y, size_t max_quote_tokens) {
  ParsedOutput out;
  Diagnostics diag;

  std::string answer = ExtractAnswer(y, &diag);
  if (!diag.flags.Has(FormatFlag::kNoAnswerMarker)) out.answer = std::move(answer);

  const auto decl = FindIdDeclaration(y, &diag);
  if (!decl.found || decl.malformed) {
    diag.flags.Set(FormatFlag::kMalformedIds);
    if (decl.found) out.doc_ids = std::set<int>{};
  } else {
    out.doc_ids = decl.ids;
  }

  auto section = ParseContentSection(y, &diag);
  if (section.header_found) out.contents = std::move(section.blocks);

  auto quotes = ExtractQuotes(y, &diag, max_quote_tokens);
  if (!quotes.empty()) out.quotes = std::move(quotes);

  out.citations = ExtractCitations(y);
  out.flags = diag.flags;
  out.notes = std::move(diag.notes);
  return out;
}

nlohmann::json ToJson(const ParsedOutput& p) {
  nlohmann::json j;
  j["answer"] = p.answer ? nlohmann::json(*p.answer) : nlohmann::json(nullptr);
  j["doc_ids"] = p.doc_ids ? nlohmann::json(*p.doc_ids) : nlohmann::json(nullptr);
  if (p.contents) {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [k, v] : *p.contents) c[std::to_string(k)] = v;
    j["contents"] = std::move(c);
  } else {
    j["contents"] = nullptr;
  }
  j["quotes"] = p.quotes ? nlohmann::json(*p.quotes) : nlohmann::json(nullptr);
  j["citations"] =
      p.citations ? nlohmann::json(*p.citations) : nlohmann::json(nullptr);
  j["flags"] = p.flags.Names();
  j["notes"] = p.notes;
  return j;
}

}  // namespace icrkit::parsing
