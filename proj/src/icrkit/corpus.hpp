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

// Training-instance construction: chunking, tagging, seeded shuffling,
// hard-negative promotion, length filtering and train/dev splitting.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icrkit/judge.hpp"
#include "json.hpp"

namespace icrkit::corpus {

enum class Origin { kGold, kHardNegative, kPromoted };

std::string_view OriginName(Origin o);
Origin ParseOrigin(std::string_view s);

struct Document {
  int index = 0;
  std::string text;
  Origin origin = Origin::kHardNegative;

  bool operator==(const Document&) const = default;
};

struct ContextInstance {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  std::vector<Document> documents;
  std::set<int> gold_ids;
  std::string source;

  // Throws Error(kValidation) when an invariant does not hold.
  void Validate() const;
  bool operator==(const ContextInstance&) const = default;
};

enum class ChunkUnit { kWords, kTokens };

struct BuildConfig {
  size_t max_context_tokens = 32768;
  std::uint64_t shuffle_seed = 0;
  size_t retriever_top_k = 500;
  double fuzzy_threshold = 0.6;
  ChunkUnit chunk_unit = ChunkUnit::kWords;
  size_t chunk_size = 100;
  int ngram_n = 3;

  void Validate() const;
};

// Mersenne Twister (std::mt19937_64, whose output sequence the C++ standard
// fixes) seeded with splitmix64(seed ^ fnv1a64(key)). Bounded draws use
// rejection sampling so results do not depend on the standard library's
// distribution implementations.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::string_view key);
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t Below(std::uint64_t bound);
  // Fisher-Yates; element i swaps with a draw from [0, i].
  std::vector<size_t> Permutation(size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t Fnv1a64(std::string_view s);
std::uint64_t SplitMix64(std::uint64_t x);

// Words are whitespace-delimited. Tokens are runs of letters/digits or single
// punctuation characters. Passages re-join units with single spaces.
std::vector<std::string> ChunkArticle(std::string_view text,
                                      const BuildConfig& cfg);

// "[DOC i] text" lines joined by '\n'. Throws Error(kValidation) when indices
// are not 0..n-1 in order.
std::string TagDocuments(std::span<const Document> docs);

// Documents are permuted deterministically from (seed, inst.id), indices
// renumbered, and gold_ids remapped so the same texts stay gold.
ContextInstance ShuffleInstance(const ContextInstance& inst, std::uint64_t seed);

struct PromotionCandidate {
  size_t negative = 0;   // position in the negatives list
  int matched_gold = -1; // position in the golds list; lowest wins ties
  double jaccard = 0.0;
  double char_f1 = 0.0;
  double ngram = 0.0;
  double max_similarity = 0.0;
  bool promoted = false;
};

// A negative is promoted when any similarity against any gold reaches the
// (inclusive) threshold.
std::vector<PromotionCandidate> PromoteHardNegatives(
    std::span<const Document> golds, std::span<const Document> negatives,
    const BuildConfig& cfg);

struct JudgeDecision {
  size_t negative = 0;
  bool accepted = false;
  bool parse_failed = false;
  std::string raw_response;
};

// Sends every promoted candidate to the judge. Returns one decision per
// promoted candidate in input order; unparseable verdicts reject the
// promotion and set parse_failed. Judge transport errors propagate.
std::vector<JudgeDecision> JudgeFilter(
    const std::string& question, std::span<const Document> golds,
    std::span<const Document> negatives,
    std::span<const PromotionCandidate> promotions,
    judge::JudgeClient& judge, size_t max_in_flight = 4);

class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual size_t Count(std::string_view text,
                       std::string_view instance_id) const = 0;
};

class WhitespaceTokenCounter : public TokenCounter {
 public:
  size_t Count(std::string_view text, std::string_view) const override;
};

// Model-exact counts supplied as JSON lines {"id": str, "tokens": int}.
// The text argument is ignored; unknown ids raise Error(kNotFound).
class SidecarTokenCounter : public TokenCounter {
 public:
  explicit SidecarTokenCounter(std::map<std::string, size_t> counts);
  static std::unique_ptr<SidecarTokenCounter> FromFile(
      const std::filesystem::path& path);
  size_t Count(std::string_view text,
               std::string_view instance_id) const override;

 private:
  std::map<std::string, size_t> counts_;
};

// True iff the tagged context plus the question fits in max_context_tokens
// (inclusive).
bool FilterByLength(const ContextInstance& inst, const TokenCounter& counter,
                    const BuildConfig& cfg);

struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> dev;
};

// |train| = round(ratio * n). Both lists are ascending, so each partition
// keeps the input order.
SplitIndices SplitDataset(size_t n, double ratio, std::uint64_t seed);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> SplitDataset(
    const std::vector<T>& items, double ratio, std::uint64_t seed) {
  const auto idx = SplitDataset(items.size(), ratio, seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  for (size_t i : idx.train) out.first.push_back(items[i]);
  for (size_t i : idx.dev) out.second.push_back(items[i]);
  return out;
}

// Instance file rows: {"id", "question", "answers", "docs": [{"text",
// "origin"}], "gold_ids"}. Unknown keys are ignored on read.
nlohmann::json ToJson(const ContextInstance& inst);
ContextInstance InstanceFromJson(const nlohmann::json& j);

// Candidate-retrieval ingestion rows.
struct CandidateRecord {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  std::vector<std::string> gold_docs;
  std::vector<std::string> retrieved;
};
CandidateRecord CandidateFromJson(const nlohmann::json& j);

}  // namespace icrkit::corpus
