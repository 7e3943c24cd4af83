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

// Decomposes raw model outputs into the fields the reward functions score.
//
// Recognized layouts:
//   answer      "Answer: X", "The answer is: X", "The correct answer is X"
//               (last occurrence wins)
//   id list     "Relevant Document IDs: [DOC i], [DOC j]" or a line made only
//               of "[DOC i]" tags; "[DOC -1]" alone declares no relevant docs
//   contents    "Relevant documents:" followed by "[DOC X]" blocks
//   quotes      'Quote N: "..."' lines, straight or curly double quotes
//   citations   every "[DOC X]" with X >= 0 anywhere in the output
//   verdict     three "\boxed{Criterion N: 0|1}" boxes
//
// Extractors never throw on odd input; anomalies are reported through
// FormatFlags and free-form notes. ParseJudgeVerdict is the exception and
// throws Error(kParse).

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace icrkit::parsing {

enum class FormatFlag : std::uint32_t {
  kNoAnswerMarker = 1u << 0,
  kMalformedIds = 1u << 1,
  kOverlongQuote = 1u << 2,
  kEmptySections = 1u << 3,
};

class FormatFlags {
 public:
  void Set(FormatFlag f) { bits_ |= static_cast<std::uint32_t>(f); }
  bool Has(FormatFlag f) const {
    return (bits_ & static_cast<std::uint32_t>(f)) != 0;
  }
  bool Empty() const { return bits_ == 0; }
  void Merge(FormatFlags other) { bits_ |= other.bits_; }
  std::vector<std::string> Names() const;
  bool operator==(const FormatFlags&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

std::string_view FlagName(FormatFlag f);

// Collects flags and notes across extractor calls.
struct Diagnostics {
  FormatFlags flags;
  std::vector<std::string> notes;
};

inline constexpr size_t kMaxQuoteTokens = 30;

struct ParsedOutput {
  std::optional<std::string> answer;
  std::optional<std::set<int>> doc_ids;
  std::optional<std::map<int, std::string>> contents;
  std::optional<std::vector<std::string>> quotes;
  std::optional<std::set<int>> citations;
  FormatFlags flags;
  std::vector<std::string> notes;

  bool operator==(const ParsedOutput&) const = default;
};

struct JudgeVerdict {
  int reasoning_quality = 0;
  int document_grounding = 0;
  int answer_correctness = 0;
  std::string raw;

  bool operator==(const JudgeVerdict&) const = default;
};

struct DocSpan {
  int index = 0;
  size_t begin = 0;  // byte offsets into the context, [begin, end)
  size_t end = 0;

  bool operator==(const DocSpan&) const = default;
};

// A "[DOC n]" tag located in a string.
struct DocTag {
  long long index = 0;
  size_t begin = 0;
  size_t end = 0;
  bool canonical = true;  // exactly "[DOC n]" with a single inner space
};

// Parses a tag starting exactly at pos.
std::optional<DocTag> MatchTagAt(std::string_view s, size_t pos);
std::vector<DocTag> FindTags(std::string_view s);

struct MarkerHit {
  size_t begin = 0;
  size_t end = 0;
};
// Last answer marker in y, if any.
std::optional<MarkerHit> FindLastAnswerMarker(std::string_view y);

std::string ExtractAnswer(std::string_view y, Diagnostics* diag = nullptr);
std::set<int> ExtractDocIds(std::string_view y, Diagnostics* diag = nullptr);
std::map<int, std::string> ExtractContents(std::string_view y,
                                           Diagnostics* diag = nullptr);
std::vector<std::string> ExtractQuotes(std::string_view y,
                                       Diagnostics* diag = nullptr,
                                       size_t max_quote_tokens = kMaxQuoteTokens);
std::set<int> ExtractCitations(std::string_view y);
JudgeVerdict ParseJudgeVerdict(std::string_view text);

// Inverse of the "[DOC i] text" newline-joined tagging template. Throws
// Error(kParse) when the context does not follow it.
std::vector<DocSpan> ExtractDocSpans(std::string_view context);

// Runs every extractor. Fields whose section is absent stay empty optionals;
// a malformed id declaration leaves doc_ids empty.
ParsedOutput ParseOutput(std::string_view y,
                         size_t max_quote_tokens = kMaxQuoteTokens);

nlohmann::json ToJson(const ParsedOutput& parsed);

}  // namespace icrkit::parsing
