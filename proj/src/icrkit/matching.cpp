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

#include "icrkit/matching.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "icrkit/error.hpp"
#include "icrkit/text.hpp"

namespace icrkit::matching {

namespace {

bool IsArticle(std::u32string_view w) {
  return w == U"a" || w == U"an" || w == U"the";
}

// Both-empty is identity, one-empty is disjoint.
template <typename Set>
double SetJaccard(const Set& a, const Set& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

std::string Normalize(std::string_view s, const NormalizationRules& rules) {
  std::u32string cps = text::DecodeUtf8(s);

  std::u32string stage;
  stage.reserve(cps.size());
  for (char32_t c : cps) {
    if (rules.strip_punctuation && text::IsPunctuation(c)) continue;
    stage.push_back(rules.lowercase ? text::ToLower(c) : c);
  }

  if (rules.remove_articles) {
    // Drop article words but keep the surrounding whitespace untouched so the
    // collapse step alone decides spacing.
    std::u32string kept;
    kept.reserve(stage.size());
    size_t i = 0;
    while (i < stage.size()) {
      if (text::IsSpace(stage[i])) {
        kept.push_back(stage[i++]);
        continue;
      }
      size_t j = i;
      while (j < stage.size() && !text::IsSpace(stage[j])) ++j;
      const std::u32string_view word(stage.data() + i, j - i);
      if (!IsArticle(word)) kept.append(word);
      i = j;
    }
    stage = std::move(kept);
  }

  std::u32string out;
  out.reserve(stage.size());
  if (rules.collapse_whitespace) {
    for (const auto w : text::SplitWhitespace(std::u32string_view(stage))) {
      if (!out.empty()) out.push_back(U' ');
      out.append(w);
    }
  } else {
    size_t b = 0;
    size_t e = stage.size();
    while (b < e && text::IsSpace(stage[b])) ++b;
    while (e > b && text::IsSpace(stage[e - 1])) --e;
    out.assign(stage, b, e - b);
  }
  return text::EncodeUtf8(out);
}

bool SubExactMatch(std::string_view prediction, std::string_view gold,
                   const NormalizationRules& rules) {
  const std::string g = Normalize(gold, rules);
  if (g.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "gold answer is empty after normalization");
  }
  return Normalize(prediction, rules).find(g) != std::string::npos;
}

std::vector<std::string> NormalizedTokens(std::string_view s,
                                          const NormalizationRules& rules) {
  const std::string norm = Normalize(s, rules);
  std::vector<std::string> out;
  for (const auto tok : text::SplitWhitespace(norm)) out.emplace_back(tok);
  return out;
}

double JaccardSimilarity(std::string_view a, std::string_view b,
                         const NormalizationRules& rules) {
  const auto ta = NormalizedTokens(a, rules);
  const auto tb = NormalizedTokens(b, rules);
  return SetJaccard(std::set<std::string>(ta.begin(), ta.end()),
                    std::set<std::string>(tb.begin(), tb.end()));
}

double CharF1(std::string_view a, std::string_view b,
              const NormalizationRules& rules) {
  auto histogram = [&](std::string_view s) {
    std::unordered_map<char32_t, size_t> h;
    size_t total = 0;
    for (char32_t c : text::DecodeUtf8(Normalize(s, rules))) {
      if (text::IsSpace(c)) continue;
      ++h[c];
      ++total;
    }
    return std::make_pair(h, total);
  };
  const auto [ha, na] = histogram(a);
  const auto [hb, nb] = histogram(b);
  if (na == 0 && nb == 0) return 1.0;
  if (na == 0 || nb == 0) return 0.0;
  size_t overlap = 0;
  for (const auto& [c, count] : ha) {
    const auto it = hb.find(c);
    if (it != hb.end()) overlap += std::min(count, it->second);
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / na;
  const double recall = static_cast<double>(overlap) / nb;
  return 2.0 * precision * recall / (precision + recall);
}

double NgramOverlap(std::string_view a, std::string_view b, int n,
                    const NormalizationRules& rules) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  }
  const auto ta = NormalizedTokens(a, rules);
  const auto tb = NormalizedTokens(b, rules);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  const size_t order = std::max<size_t>(
      1, std::min({static_cast<size_t>(n), ta.size(), tb.size()}));
  auto grams = [order](const std::vector<std::string>& toks) {
    std::set<std::vector<std::string>> out;
    for (size_t i = 0; i + order <= toks.size(); ++i) {
      out.emplace(toks.begin() + i, toks.begin() + i + order);
    }
    return out;
  };
  return SetJaccard(grams(ta), grams(tb));
}

size_t TokenCount(std::string_view s) {
  return text::SplitWhitespace(s).size();
}

}  // namespace icrkit::matching
