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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "icrkit/corpus.hpp"
#include "icrkit/error.hpp"
#include "icrkit/jsonl.hpp"

namespace icrkit::corpus {
namespace {

std::string Words(size_t n) {
  std::string s;
  for (size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += "w" + std::to_string(i);
  }
  return s;
}

ContextInstance MakeInstance(const std::string& id,
                             const std::vector<std::string>& texts,
                             std::set<int> golds) {
  ContextInstance inst;
  inst.id = id;
  inst.question = "q?";
  inst.answers = {"a"};
  for (size_t i = 0; i < texts.size(); ++i) {
    inst.documents.push_back({static_cast<int>(i), texts[i],
                              golds.count(static_cast<int>(i))
                                  ? Origin::kGold
                                  : Origin::kHardNegative});
  }
  inst.gold_ids = std::move(golds);
  return inst;
}

// Answers each promotion request from a per-candidate table.
class TableJudge : public judge::JudgeClient {
 public:
  explicit TableJudge(std::map<std::string, std::string> by_candidate)
      : by_candidate_(std::move(by_candidate)) {}
  std::string Complete(const judge::JudgeRequest& r) override {
    return by_candidate_.at(r.payload.at("candidate").get<std::string>());
  }

 private:
  std::map<std::string, std::string> by_candidate_;
};

TEST_CASE("ChunkArticle") {
  BuildConfig cfg;
  const auto p = ChunkArticle(Words(250), cfg);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == Words(100));
  CHECK(p[2].substr(0, 5) == "w200 ");
  CHECK(ChunkArticle("", cfg).empty());
  const auto one = ChunkArticle(Words(100), cfg);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Words(100));

  cfg.chunk_unit = ChunkUnit::kTokens;
  cfg.chunk_size = 2;
  CHECK(ChunkArticle("Hi, there!", cfg) ==
        std::vector<std::string>{"Hi ,", "there !"});
}

TEST_CASE("TagDocuments") {
  const std::vector<Document> two = {{0, "A", Origin::kGold},
                                     {1, "B", Origin::kHardNegative}};
  CHECK(TagDocuments(two) == "[DOC 0] A\n[DOC 1] B");
  CHECK(TagDocuments(std::vector<Document>{}) == "");
  CHECK(TagDocuments(std::vector<Document>{{0, "x", Origin::kGold}}) ==
        "[DOC 0] x");
  const std::vector<Document> gap = {{0, "A", Origin::kGold},
                                     {2, "B", Origin::kGold}};
  CHECK_THROWS_AS(TagDocuments(gap), Error);
}

TEST_CASE("ShuffleInstance") {
  const auto single = MakeInstance("s", {"only"}, {0});
  CHECK(ShuffleInstance(single, 42) == single);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = MakeInstance("k" + std::to_string(seed), {"g", "n1", "n2"}, {0});
    const auto out = ShuffleInstance(inst, seed);
    REQUIRE(out.gold_ids.size() == 1);
    CHECK(out.documents[*out.gold_ids.begin()].text == "g");
    CHECK(out.documents[*out.gold_ids.begin()].origin == Origin::kGold);
    out.Validate();
  }
}

TEST_CASE("ShuffleInstance matches the frozen seed-42 golden file") {
  const auto golden = nlohmann::json::parse(jsonl::ReadFile(
      std::filesystem::path(ICRKIT_TEST_DATA_DIR) / "shuffle_seed42.json"));
  const auto input = InstanceFromJson(golden.at("input"));
  const auto expected = InstanceFromJson(golden.at("shuffled"));
  CHECK(ShuffleInstance(input, 42) == expected);
  CHECK(ShuffleInstance(input, 42) == ShuffleInstance(input, 42));
}

TEST_CASE("PromoteHardNegatives") {
  BuildConfig cfg;
  const std::vector<Document> golds = {{0, "a b c d", Origin::kGold}};
  const std::vector<Document> negs = {{0, "a b c d", Origin::kHardNegative},
                                      {1, "w x y z", Origin::kHardNegative},
                                      {2, "a b c q", Origin::kHardNegative}};
  const auto r = PromoteHardNegatives(golds, negs, cfg);
  REQUIRE(r.size() == 3);
  CHECK(r[0].promoted);
  CHECK(r[0].jaccard == 1.0);
  CHECK(r[0].char_f1 == 1.0);
  CHECK(r[0].ngram == 1.0);
  CHECK_FALSE(r[1].promoted);
  CHECK(r[1].max_similarity == 0.0);
  CHECK(r[2].promoted);
  CHECK(r[2].jaccard == doctest::Approx(0.6));
}

TEST_CASE("promotion is monotone in the threshold") {
  const std::vector<Document> golds = {
      {0, "the oberoi group is a hotel company", Origin::kGold},
      {1, "1844 1846 1990", Origin::kGold}};
  const std::vector<Document> negs = {
      {0, "taj hotels headquartered in mumbai", Origin::kHardNegative},
      {1, "the oberoi group hotel company delhi", Origin::kHardNegative},
      {2, "1844 1846", Origin::kHardNegative},
      {3, "77", Origin::kHardNegative}};
  size_t prev = negs.size() + 1;
  for (double t = 0.0; t <= 1.0001; t += 0.05) {
    BuildConfig cfg;
    cfg.fuzzy_threshold = t;
    size_t count = 0;
    for (const auto& c : PromoteHardNegatives(golds, negs, cfg)) count += c.promoted;
    CHECK(count <= prev);
    prev = count;
  }
}

TEST_CASE("JudgeFilter") {
  const std::vector<Document> golds = {{0, "gold", Origin::kGold}};
  std::vector<Document> negs;
  std::vector<PromotionCandidate> promos;
  for (int i = 0; i < 4; ++i) {
    negs.push_back({i, "n" + std::to_string(i), Origin::kHardNegative});
    PromotionCandidate c;
    c.negative = static_cast<size_t>(i);
    c.promoted = true;
    promos.push_back(c);
  }
  SUBCASE("mixed yes/no") {
    TableJudge j({{"n0", "yes"}, {"n1", "no"}, {"n2", "yes"}, {"n3", "no"}});
    const auto d = JudgeFilter("q", golds, negs, promos, j);
    REQUIRE(d.size() == 4);
    CHECK(d[0].accepted);
    CHECK_FALSE(d[1].accepted);
    CHECK(d[2].accepted);
    CHECK_FALSE(d[3].accepted);
  }
  SUBCASE("all relevant") {
    judge::RecordedJudge j(std::map<std::string, std::string>{{"*", "relevant"}});
    for (const auto& d : JudgeFilter("q", golds, negs, promos, j)) CHECK(d.accepted);
  }
  SUBCASE("all irrelevant") {
    judge::RecordedJudge j(std::map<std::string, std::string>{{"*", "irrelevant"}});
    for (const auto& d : JudgeFilter("q", golds, negs, promos, j)) {
      CHECK_FALSE(d.accepted);
    }
  }
  SUBCASE("unparseable verdict rejects and flags") {
    judge::RecordedJudge j(std::map<std::string, std::string>{{"*", "maybe"}});
    for (const auto& d : JudgeFilter("q", golds, negs, promos, j)) {
      CHECK_FALSE(d.accepted);
      CHECK(d.parse_failed);
    }
  }
}

TEST_CASE("FilterByLength") {
  WhitespaceTokenCounter ws;
  BuildConfig cfg;
  ContextInstance empty;
  empty.id = "e";
  CHECK(FilterByLength(empty, ws, cfg));

  auto inst = MakeInstance("x", {"a b c d e f g h"}, {0});
  inst.question = "q";
  // "[DOC 0]" contributes two units; 2 + 8 + 1 = 11.
  cfg.max_context_tokens = 5;
  CHECK_FALSE(FilterByLength(inst, ws, cfg));
  cfg.max_context_tokens = 11;
  CHECK(FilterByLength(inst, ws, cfg));
  cfg.max_context_tokens = 10;
  CHECK_FALSE(FilterByLength(inst, ws, cfg));

  SidecarTokenCounter side({{"x", 7}});
  cfg.max_context_tokens = 7;
  CHECK(FilterByLength(inst, side, cfg));
  inst.id = "unknown";
  CHECK_THROWS_AS(FilterByLength(inst, side, cfg), Error);
}

TEST_CASE("SplitDataset") {
  const auto big = SplitDataset(30000, 0.95, 1);
  CHECK(big.train.size() == 28500);
  CHECK(big.dev.size() == 1500);
  const auto two = SplitDataset(2, 0.5, 9);
  CHECK(two.train.size() == 1);
  CHECK(two.dev.size() == 1);
  const auto none = SplitDataset(0, 0.95, 1);
  CHECK(none.train.empty());
  CHECK(none.dev.empty());
  const auto a = SplitDataset(100, 0.9, 5);
  const auto b = SplitDataset(100, 0.9, 5);
  CHECK(a.train == b.train);
  CHECK(a.dev == b.dev);
  CHECK(std::is_sorted(a.train.begin(), a.train.end()));
  CHECK_THROWS_AS(SplitDataset(10, 1.0, 0), Error);
}

TEST_CASE("instance JSON round trip and validation") {
  const auto inst = MakeInstance("r", {"g", "n"}, {0});
  CHECK(InstanceFromJson(ToJson(inst)) == inst);
  auto bad = ToJson(inst);
  bad["gold_ids"] = {5};
  CHECK_THROWS_AS(InstanceFromJson(bad), Error);
  CHECK_THROWS_AS(
      CandidateFromJson({{"id", "c"}, {"question", "q"}, {"answers", {"a"}},
                         {"gold_docs", nlohmann::json::array()},
                         {"retrieved", nlohmann::json::array()}}),
      Error);
}

TEST_CASE("SeededRng is deterministic and bounded") {
  SeededRng a(42, "key");
  SeededRng b(42, "key");
  SeededRng c(43, "key");
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.Below(7);
    CHECK(x < 7);
    CHECK(x == b.Below(7));
    differs |= x != c.Below(7);
  }
  CHECK(differs);
  auto p = SeededRng(1, "p").Permutation(20);
  std::sort(p.begin(), p.end());
  for (size_t i = 0; i < p.size(); ++i) CHECK(p[i] == i);
}

}  // namespace
}  // namespace icrkit::corpus
