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

#include "icrkit/pipeline.hpp"

#include <memory>
#include <optional>
#include <set>

#include "icrkit/error.hpp"
#include "icrkit/jsonl.hpp"
#include "icrkit/log.hpp"
#include "icrkit/parallel.hpp"
#include "icrkit/text.hpp"

namespace icrkit::pipeline {

using corpus::Document;
using corpus::Origin;

RefinedInstance RefineCandidate(const corpus::CandidateRecord& c,
                                const corpus::BuildConfig& cfg,
                                judge::JudgeClient* judge,
                                size_t judge_max_in_flight,
                                bool chunk_retrieved) {
  RefinedInstance out;
  std::vector<Document> golds;
  std::set<std::string> seen;
  for (const auto& g : c.gold_docs) {
    const std::string t(text::Trim(g));
    if (!seen.insert(t).second) continue;
    golds.push_back({static_cast<int>(golds.size()), t, Origin::kGold});
  }

  std::vector<Document> negatives;
  auto add_negative = [&](std::string_view passage) {
    if (negatives.size() >= cfg.retriever_top_k) return;
    const std::string t(text::Trim(passage));
    if (t.empty() || !seen.insert(t).second) return;
    negatives.push_back({static_cast<int>(negatives.size()), t, Origin::kHardNegative});
  };
  for (const auto& r : c.retrieved) {
    if (chunk_retrieved) {
      for (const auto& p : corpus::ChunkArticle(r, cfg)) add_negative(p);
    } else {
      add_negative(r);
    }
  }

  const auto promotions = corpus::PromoteHardNegatives(golds, negatives, cfg);
  std::vector<bool> accept(negatives.size(), false);
  for (const auto& p : promotions) {
    if (!p.promoted) continue;
    ++out.promoted_by_similarity;
    if (judge == nullptr) accept[p.negative] = true;
  }
  if (judge != nullptr && out.promoted_by_similarity > 0) {
    const auto decisions = corpus::JudgeFilter(c.question, golds, negatives,
                                               promotions, *judge, judge_max_in_flight);
    for (const auto& d : decisions) {
      accept[d.negative] = d.accepted;
      if (d.parse_failed) ++out.judge_parse_failures;
      if (d.accepted) {
        ++out.judge_accepted;
      } else {
        ++out.judge_rejected;
      }
    }
  }

  auto& inst = out.instance;
  inst.id = c.id;
  inst.question = c.question;
  inst.answers = c.answers;
  for (const auto& g : golds) {
    inst.gold_ids.insert(static_cast<int>(inst.documents.size()));
    inst.documents.push_back({static_cast<int>(inst.documents.size()), g.text, Origin::kGold});
  }
  for (size_t i = 0; i < negatives.size(); ++i) {
    const int idx = static_cast<int>(inst.documents.size());
    if (accept[i]) {
      inst.gold_ids.insert(idx);
      inst.documents.push_back({idx, negatives[i].text, Origin::kPromoted});
    } else {
      inst.documents.push_back({idx, negatives[i].text, Origin::kHardNegative});
    }
  }
  out.gold_before = golds.size();
  out.negatives = negatives.size();
  inst.Validate();
  return out;
}

BuildDataResult BuildData(const BuildDataOptions& opts, judge::JudgeClient* judge) {
  opts.build.Validate();
  if (!(opts.train_ratio > 0.0 && opts.train_ratio <= 1.0)) {
    throw Error(ErrorCode::kConfig, "train_ratio must be in (0, 1]");
  }
  if (!std::filesystem::exists(opts.candidates)) {
    throw Error(ErrorCode::kIo, "candidate file not found: " + opts.candidates.string());
  }

  std::vector<corpus::CandidateRecord> records;
  size_t lines = 0;
  const auto errors = jsonl::ForEach(opts.candidates, [&](const nlohmann::json& j, size_t) {
    records.push_back(corpus::CandidateFromJson(j));
  });
  lines = records.size() + errors.size();
  nlohmann::json malformed = nlohmann::json::array();
  for (const auto& e : errors) {
    log::Warning(opts.candidates.string() + ":" + std::to_string(e.line) + ": " + e.message);
    malformed.push_back({{"line", e.line}, {"message", e.message}});
  }
  if (lines == 0) {
    throw Error(ErrorCode::kValidation, "no candidate rows in " + opts.candidates.string());
  }
  if (static_cast<double>(errors.size()) >
      opts.max_malformed_fraction * static_cast<double>(lines)) {
    throw Error(ErrorCode::kValidation,
                std::to_string(errors.size()) + " of " + std::to_string(lines) +
                    " candidate lines are malformed; aborting");
  }

  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) {
      throw Error(ErrorCode::kValidation, "duplicate candidate id '" + r.id + "'");
    }
  }

  std::unique_ptr<corpus::TokenCounter> counter;
  if (opts.token_counts.empty()) {
    counter = std::make_unique<corpus::WhitespaceTokenCounter>();
  } else {
    counter = corpus::SidecarTokenCounter::FromFile(opts.token_counts);
  }

  std::vector<RefinedInstance> refined(records.size());
  std::vector<std::optional<corpus::ContextInstance>> kept(records.size());
  ParallelFor(records.size(), opts.workers, [&](size_t i) {
    refined[i] = RefineCandidate(records[i], opts.build, judge,
                                 opts.judge_max_in_flight, opts.chunk_retrieved);
    auto shuffled = corpus::ShuffleInstance(refined[i].instance, opts.build.shuffle_seed);
    if (corpus::FilterByLength(shuffled, *counter, opts.build)) {
      kept[i] = std::move(shuffled);
    }
  });

  std::vector<corpus::ContextInstance> instances;
  size_t too_long = 0, gold_before = 0, gold_after = 0, negatives = 0;
  size_t promoted = 0, accepted = 0, rejected = 0, parse_failures = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = refined[i];
    gold_before += r.gold_before;
    gold_after += r.instance.gold_ids.size();
    negatives += r.negatives;
    promoted += r.promoted_by_similarity;
    accepted += r.judge_accepted;
    rejected += r.judge_rejected;
    parse_failures += r.judge_parse_failures;
    if (kept[i]) {
      instances.push_back(std::move(*kept[i]));
    } else {
      ++too_long;
    }
  }
  if (instances.empty()) {
    throw Error(ErrorCode::kValidation, "every instance was rejected by the length filter");
  }

  const auto [train, dev] =
      corpus::SplitDataset(instances, opts.train_ratio, opts.build.shuffle_seed);
  std::vector<nlohmann::json> train_rows, dev_rows;
  for (const auto& inst : train) train_rows.push_back(corpus::ToJson(inst));
  for (const auto& inst : dev) dev_rows.push_back(corpus::ToJson(inst));
  jsonl::Write(opts.output_dir / "train.jsonl", train_rows);
  jsonl::Write(opts.output_dir / "dev.jsonl", dev_rows);

  const double n = static_cast<double>(records.size());
  BuildDataResult result;
  result.train = train.size();
  result.dev = dev.size();
  result.malformed = errors.size();
  result.report = {
      {"input_lines", lines},
      {"malformed_lines", malformed},
      {"candidates", records.size()},
      {"instances", instances.size()},
      {"train", train.size()},
      {"dev", dev.size()},
      {"rejections", {{"too_long", too_long}}},
      {"promotion",
       {{"negatives_scored", negatives},
        {"promoted_by_similarity", promoted},
        {"judge_used", judge != nullptr},
        {"judge_accepted", accepted},
        {"judge_rejected", rejected},
        {"judge_parse_failures", parse_failures},
        {"mean_gold_before", records.empty() ? 0.0 : gold_before / n},
        {"mean_gold_after", records.empty() ? 0.0 : gold_after / n}}},
  };
  jsonl::WriteFile(opts.output_dir / "build_report.json", result.report.dump(2) + "\n");
  log::Info("built " + std::to_string(train.size()) + " train / " +
            std::to_string(dev.size()) + " dev instances");
  return result;
}

}  // namespace icrkit::pipeline
