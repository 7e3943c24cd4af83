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

#include "icrkit/corpus.hpp"

#include <algorithm>
#include <cmath>

#include "icrkit/error.hpp"
#include "icrkit/jsonl.hpp"
#include "icrkit/matching.hpp"
#include "icrkit/parallel.hpp"
#include "icrkit/text.hpp"

namespace icrkit::corpus {

namespace {

std::vector<std::string> SplitUnits(std::string_view s, ChunkUnit unit) {
  std::vector<std::string> out;
  if (unit == ChunkUnit::kWords) {
    for (const auto w : text::SplitWhitespace(s)) out.emplace_back(w);
    return out;
  }
  std::u32string run;
  auto flush = [&] {
    if (!run.empty()) {
      out.push_back(text::EncodeUtf8(run));
      run.clear();
    }
  };
  for (char32_t c : text::DecodeUtf8(s)) {
    if (text::IsSpace(c)) {
      flush();
    } else if (text::IsPunctuation(c)) {
      flush();
      out.push_back(text::EncodeUtf8(std::u32string(1, c)));
    } else {
      run.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace

std::string_view OriginName(Origin o) {
  switch (o) {
    case Origin::kGold: return "gold";
    case Origin::kHardNegative: return "hard_negative";
    case Origin::kPromoted: return "promoted";
  }
  return "hard_negative";
}

Origin ParseOrigin(std::string_view s) {
  if (s == "gold") return Origin::kGold;
  if (s == "hard_negative") return Origin::kHardNegative;
  if (s == "promoted") return Origin::kPromoted;
  throw Error(ErrorCode::kValidation, "unknown document origin '" +
                                          std::string(s) + "'");
}

void ContextInstance::Validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kValidation, "instance '" + id + "': " + why);
  };
  if (answers.empty()) fail("answers must be non-empty");
  if (gold_ids.empty()) fail("gold_ids must be non-empty");
  for (size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].index != static_cast<int>(i)) {
      fail("document indices must be contiguous from 0");
    }
    if (documents[i].text.empty()) {
      fail("document " + std::to_string(i) + " has empty text");
    }
  }
  for (int g : gold_ids) {
    if (g < 0 || g >= static_cast<int>(documents.size())) {
      fail("gold id " + std::to_string(g) + " out of range");
    }
    if (documents[g].origin == Origin::kHardNegative) {
      fail("gold id " + std::to_string(g) + " refers to a hard negative");
    }
  }
}

void BuildConfig::Validate() const {
  if (!(fuzzy_threshold >= 0.0 && fuzzy_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "fuzzy_threshold must be in [0, 1]");
  }
  if (chunk_size < 1) throw Error(ErrorCode::kConfig, "chunk_size must be >= 1");
  if (max_context_tokens < 1) {
    throw Error(ErrorCode::kConfig, "max_context_tokens must be >= 1");
  }
  if (retriever_top_k < 1) {
    throw Error(ErrorCode::kConfig, "retriever_top_k must be >= 1");
  }
  if (ngram_n < 1) throw Error(ErrorCode::kConfig, "ngram_n must be >= 1");
}

std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed, std::string_view key)
    : engine_(SplitMix64(seed ^ Fnv1a64(key))) {}

std::uint64_t SeededRng::Below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "empty range");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

std::vector<size_t> SeededRng::Permutation(size_t n) {
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(Below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::string> ChunkArticle(std::string_view article,
                                      const BuildConfig& cfg) {
  if (cfg.chunk_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "chunk_size must be >= 1");
  }
  const auto units = SplitUnits(article, cfg.chunk_unit);
  std::vector<std::string> passages;
  for (size_t i = 0; i < units.size(); i += cfg.chunk_size) {
    std::string passage;
    const size_t end = std::min(units.size(), i + cfg.chunk_size);
    for (size_t k = i; k < end; ++k) {
      if (k > i) passage.push_back(' ');
      passage += units[k];
    }
    passages.push_back(std::move(passage));
  }
  return passages;
}

std::string TagDocuments(std::span<const Document> docs) {
  std::string out;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].index != static_cast<int>(i)) {
      throw Error(ErrorCode::kValidation,
                  "document indices must be contiguous from 0");
    }
    if (i > 0) out.push_back('\n');
    out += "[DOC " + std::to_string(i) + "] ";
    out += docs[i].text;
  }
  return out;
}

ContextInstance ShuffleInstance(const ContextInstance& inst,
                                std::uint64_t seed) {
  SeededRng rng(seed, inst.id);
  // perm[new_position] = old_position
  const auto perm = rng.Permutation(inst.documents.size());
  ContextInstance out = inst;
  out.gold_ids.clear();
  for (size_t pos = 0; pos < perm.size(); ++pos) {
    out.documents[pos] = inst.documents[perm[pos]];
    out.documents[pos].index = static_cast<int>(pos);
    if (inst.gold_ids.count(static_cast<int>(perm[pos]))) {
      out.gold_ids.insert(static_cast<int>(pos));
    }
  }
  return out;
}

std::vector<PromotionCandidate> PromoteHardNegatives(
    std::span<const Document> golds, std::span<const Document> negatives,
    const BuildConfig& cfg) {
  if (golds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "promotion needs gold passages");
  }
  std::vector<PromotionCandidate> report;
  report.reserve(negatives.size());
  for (size_t n = 0; n < negatives.size(); ++n) {
    PromotionCandidate best;
    best.negative = n;
    best.max_similarity = -1.0;
    for (size_t g = 0; g < golds.size(); ++g) {
      const auto& a = golds[g].text;
      const auto& b = negatives[n].text;
      const double jac = matching::JaccardSimilarity(a, b);
      const double cf1 = matching::CharF1(a, b);
      const double ng = matching::NgramOverlap(a, b, cfg.ngram_n);
      const double score = std::max({jac, cf1, ng});
      if (score > best.max_similarity) {
        best.matched_gold = static_cast<int>(g);
        best.jaccard = jac;
        best.char_f1 = cf1;
        best.ngram = ng;
        best.max_similarity = score;
      }
    }
    best.promoted = best.max_similarity >= cfg.fuzzy_threshold;
    report.push_back(best);
  }
  return report;
}

std::vector<JudgeDecision> JudgeFilter(
    const std::string& question, std::span<const Document> golds,
    std::span<const Document> negatives,
    std::span<const PromotionCandidate> promotions, judge::JudgeClient& judge,
    size_t max_in_flight) {
  std::vector<std::string> gold_texts;
  for (const auto& g : golds) gold_texts.push_back(g.text);
  std::vector<const PromotionCandidate*> todo;
  for (const auto& p : promotions) {
    if (p.promoted) todo.push_back(&p);
  }
  std::vector<JudgeDecision> decisions(todo.size());
  ParallelFor(todo.size(), max_in_flight, [&](size_t i) {
    const auto& cand = *todo[i];
    if (cand.negative >= negatives.size()) {
      throw Error(ErrorCode::kInvalidArgument, "promotion refers to unknown negative");
    }
    const auto request = judge::MakePromotionRequest(
        question, gold_texts, negatives[cand.negative].text);
    JudgeDecision d;
    d.negative = cand.negative;
    d.raw_response = judge.Complete(request);
    const auto verdict = judge::ParsePromotionVerdict(d.raw_response);
    d.parse_failed = !verdict.has_value();
    d.accepted = verdict.value_or(false);
    decisions[i] = std::move(d);
  });
  return decisions;
}

size_t WhitespaceTokenCounter::Count(std::string_view text,
                                     std::string_view) const {
  return matching::TokenCount(text);
}

SidecarTokenCounter::SidecarTokenCounter(std::map<std::string, size_t> counts)
    : counts_(std::move(counts)) {}

std::unique_ptr<SidecarTokenCounter> SidecarTokenCounter::FromFile(
    const std::filesystem::path& path) {
  std::map<std::string, size_t> counts;
  const auto errors = jsonl::ForEach(path, [&](const nlohmann::json& j, size_t) {
    const auto tokens = j.at("tokens").get<long long>();
    if (tokens < 0) throw Error(ErrorCode::kValidation, "negative token count");
    counts[j.at("id").get<std::string>()] = static_cast<size_t>(tokens);
  });
  if (!errors.empty()) {
    throw Error(ErrorCode::kConfig, "token sidecar " + path.string() +
                                        " line " +
                                        std::to_string(errors.front().line) +
                                        ": " + errors.front().message);
  }
  return std::make_unique<SidecarTokenCounter>(std::move(counts));
}

size_t SidecarTokenCounter::Count(std::string_view,
                                  std::string_view instance_id) const {
  const auto it = counts_.find(std::string(instance_id));
  if (it == counts_.end()) {
    throw Error(ErrorCode::kNotFound,
                "no token count for '" + std::string(instance_id) + "'");
  }
  return it->second;
}

bool FilterByLength(const ContextInstance& inst, const TokenCounter& counter,
                    const BuildConfig& cfg) {
  std::string context = TagDocuments(inst.documents);
  if (!inst.question.empty()) {
    if (!context.empty()) context.push_back('\n');
    context += inst.question;
  }
  return counter.Count(context, inst.id) <= cfg.max_context_tokens;
}

SplitIndices SplitDataset(size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split ratio must be in (0, 1)");
  }
  SplitIndices out;
  if (n == 0) return out;
  const auto n_train = static_cast<size_t>(
      std::llround(ratio * static_cast<double>(n)));
  SeededRng rng(seed, "split");
  const auto perm = rng.Permutation(n);
  std::vector<bool> is_train(n, false);
  for (size_t k = 0; k < n_train; ++k) is_train[perm[k]] = true;
  for (size_t i = 0; i < n; ++i) (is_train[i] ? out.train : out.dev).push_back(i);
  return out;
}

nlohmann::json ToJson(const ContextInstance& inst) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : inst.documents) {
    docs.push_back({{"text", d.text}, {"origin", OriginName(d.origin)}});
  }
  nlohmann::json j = {{"id", inst.id},
                      {"question", inst.question},
                      {"answers", inst.answers},
                      {"docs", std::move(docs)},
                      {"gold_ids", inst.gold_ids}};
  if (!inst.source.empty()) j["source"] = inst.source;
  return j;
}

ContextInstance InstanceFromJson(const nlohmann::json& j) {
  ContextInstance inst;
  try {
    inst.id = j.at("id").get<std::string>();
    inst.question = j.at("question").get<std::string>();
    inst.answers = j.at("answers").get<std::vector<std::string>>();
    const auto& docs = j.at("docs");
    if (!docs.is_array()) throw Error(ErrorCode::kValidation, "docs must be an array");
    for (size_t i = 0; i < docs.size(); ++i) {
      Document d;
      d.index = static_cast<int>(i);
      d.text = docs[i].at("text").get<std::string>();
      d.origin = docs[i].contains("origin")
                     ? ParseOrigin(docs[i].at("origin").get<std::string>())
                     : Origin::kHardNegative;
      inst.documents.push_back(std::move(d));
    }
    for (int g : j.at("gold_ids").get<std::vector<int>>()) inst.gold_ids.insert(g);
    if (j.contains("source") && j["source"].is_string()) {
      inst.source = j["source"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("bad instance: ") + e.what());
  }
  inst.Validate();
  return inst;
}

CandidateRecord CandidateFromJson(const nlohmann::json& j) {
  CandidateRecord c;
  try {
    c.id = j.at("id").get<std::string>();
    c.question = j.at("question").get<std::string>();
    c.answers = j.at("answers").get<std::vector<std::string>>();
    c.gold_docs = j.at("gold_docs").get<std::vector<std::string>>();
    c.retrieved = j.at("retrieved").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("bad candidate: ") + e.what());
  }
  if (c.id.empty()) throw Error(ErrorCode::kValidation, "candidate id is empty");
  if (c.answers.empty()) {
    throw Error(ErrorCode::kValidation, "candidate '" + c.id + "' has no answers");
  }
  if (c.gold_docs.empty()) {
    throw Error(ErrorCode::kValidation,
                "candidate '" + c.id + "' has no gold documents");
  }
  for (const auto& d : c.gold_docs) {
    if (text::Trim(d).empty()) {
      throw Error(ErrorCode::kValidation,
                  "candidate '" + c.id + "' has an empty gold document");
    }
  }
  return c;
}

}  // namespace icrkit::corpus
