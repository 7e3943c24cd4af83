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

#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "icrkit/error.hpp"
#include "icrkit/matching.hpp"

namespace icrkit::matching {
namespace {

using doctest::Approx;

std::string RandomText(std::mt19937& rng) {
  static const std::vector<std::string> kWords = {
      "The", "a", "an", "Delhi", "hotel,", "Oberoi's", "group!", "  ",
      "Magazine", "1844", "café", "(magazine)", "first", "for", "Women"};
  std::uniform_int_distribution<size_t> len(0, 12);
  std::uniform_int_distribution<size_t> pick(0, kWords.size() - 1);
  std::string s;
  for (size_t i = len(rng); i > 0; --i) {
    s += kWords[pick(rng)];
    s += rng() % 3 == 0 ? "\t" : " ";
  }
  return s;
}

TEST_CASE("Normalize examples") {
  CHECK(Normalize("The Oberoi Group!") == "oberoi group");
  CHECK(Normalize("") == "");
  CHECK(Normalize("  Delhi  ") == "delhi");
  CHECK(Normalize("A cat", NormalizationRules::Similarity()) == "a cat");
}

TEST_CASE("Normalize is idempotent without edge whitespace") {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    const std::string s = RandomText(rng);
    for (const auto& rules :
         {NormalizationRules::Answer(), NormalizationRules::Similarity()}) {
      const std::string once = Normalize(s, rules);
      CHECK(Normalize(once, rules) == once);
      if (!once.empty()) {
        CHECK(once.front() != ' ');
        CHECK(once.back() != ' ');
      }
    }
  }
}

TEST_CASE("SubExactMatch examples") {
  CHECK(SubExactMatch("The answer is: Arthur's Magazine", "Arthur's Magazine"));
  CHECK(SubExactMatch("Delhi", "Delhi"));
  CHECK_FALSE(SubExactMatch("Paris", "London"));
  CHECK_THROWS_AS(SubExactMatch("anything", "the !"), Error);
}

TEST_CASE("Jaccard examples") {
  CHECK(JaccardSimilarity("a b c", "b c d") == Approx(0.5));
  CHECK(JaccardSimilarity("same words", "same words") == 1.0);
  CHECK(JaccardSimilarity("a", "b") == 0.0);
  CHECK(JaccardSimilarity("a b c d", "a b c q") == Approx(0.6));
}

TEST_CASE("CharF1 examples") {
  CHECK(CharF1("abc", "abd") == Approx(2.0 / 3.0));
  CHECK(CharF1("hello", "hello") == 1.0);
  CHECK(CharF1("aa", "bb") == 0.0);
  CHECK(CharF1("", "") == 1.0);
}

TEST_CASE("NgramOverlap examples") {
  CHECK(NgramOverlap("a b c", "a b c", 2) == 1.0);
  CHECK(NgramOverlap("a b c d", "b c d e", 3) == Approx(1.0 / 3.0));
  CHECK(NgramOverlap("a", "b", 3) == 0.0);
}

TEST_CASE("TokenCount examples") {
  CHECK(TokenCount("") == 0);
  CHECK(TokenCount("a b  c") == 3);
  std::string thirty;
  for (int i = 0; i < 30; ++i) thirty += "word ";
  CHECK(TokenCount(thirty) == 30);
}

TEST_CASE("similarities are symmetric, bounded and reflexive") {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::string a = RandomText(rng);
    const std::string b = RandomText(rng);
    const double vals[] = {JaccardSimilarity(a, b), CharF1(a, b),
                           NgramOverlap(a, b, 3)};
    const double rev[] = {JaccardSimilarity(b, a), CharF1(b, a),
                          NgramOverlap(b, a, 3)};
    for (int k = 0; k < 3; ++k) {
      CHECK(vals[k] >= 0.0);
      CHECK(vals[k] <= 1.0);
      CHECK(vals[k] == Approx(rev[k]).epsilon(1e-12));
    }
    if (!Normalize(a, NormalizationRules::Similarity()).empty()) {
      CHECK(JaccardSimilarity(a, a) == 1.0);
      CHECK(CharF1(a, a) == 1.0);
      CHECK(NgramOverlap(a, a, 3) == 1.0);
    }
  }
}

}  // namespace
}  // namespace icrkit::matching
