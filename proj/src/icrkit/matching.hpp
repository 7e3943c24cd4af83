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

// Text normalization and the string-similarity primitives used by rewards,
// hard-negative refinement and the evaluation metrics.
//
// Two normalization profiles are in use. Answer matching (sub-exact match)
// uses the conventional QA recipe: lowercase, delete punctuation, drop the
// articles a/an/the, collapse whitespace. The similarity measures use the
// same recipe with articles kept, since single-letter tokens such as "a" are
// meaningful content when comparing passages.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace icrkit::matching {

struct NormalizationRules {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool remove_articles = true;
  bool collapse_whitespace = true;

  static NormalizationRules Answer() { return {}; }
  static NormalizationRules Similarity() {
    NormalizationRules r;
    r.remove_articles = false;
    return r;
  }

  bool operator==(const NormalizationRules&) const = default;
};

// Idempotent. The result never has leading or trailing whitespace.
std::string Normalize(std::string_view s,
                      const NormalizationRules& rules = NormalizationRules::Answer());

// True iff Normalize(gold) is a contiguous substring of Normalize(prediction).
// Throws Error(kInvalidArgument) when gold normalizes to the empty string.
bool SubExactMatch(std::string_view prediction, std::string_view gold,
                   const NormalizationRules& rules = NormalizationRules::Answer());

// Word tokens of the normalized string.
std::vector<std::string> NormalizedTokens(
    std::string_view s,
    const NormalizationRules& rules = NormalizationRules::Similarity());

// Jaccard over normalized word-token sets.
double JaccardSimilarity(
    std::string_view a, std::string_view b,
    const NormalizationRules& rules = NormalizationRules::Similarity());

// F1 over the multiset of non-whitespace characters (code points) of the
// normalized strings.
double CharF1(std::string_view a, std::string_view b,
              const NormalizationRules& rules = NormalizationRules::Similarity());

inline constexpr int kDefaultNgram = 3;

// Jaccard over word n-gram sets. When either side has fewer than n tokens,
// n drops to the smaller token count (floor 1).
double NgramOverlap(std::string_view a, std::string_view b,
                    int n = kDefaultNgram,
                    const NormalizationRules& rules = NormalizationRules::Similarity());

// Whitespace-delimited units of the raw string.
size_t TokenCount(std::string_view s);

}  // namespace icrkit::matching
