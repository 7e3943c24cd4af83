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

// Training-data build: candidate retrieval rows in, shuffled and split
// instance files out.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "icrkit/corpus.hpp"
#include "icrkit/judge.hpp"
#include "json.hpp"

namespace icrkit::pipeline {

struct BuildDataOptions {
  std::filesystem::path candidates;
  std::filesystem::path output_dir;
  corpus::BuildConfig build;
  double train_ratio = 0.95;
  std::filesystem::path token_counts;  // empty: whitespace counts
  bool chunk_retrieved = false;        // retrieved entries are whole articles
  size_t workers = 1;
  size_t judge_max_in_flight = 4;
  double max_malformed_fraction = 0.10;
};

struct RefinedInstance {
  corpus::ContextInstance instance;  // unshuffled: golds first
  size_t gold_before = 0;
  size_t negatives = 0;
  size_t promoted_by_similarity = 0;
  size_t judge_accepted = 0;
  size_t judge_rejected = 0;
  size_t judge_parse_failures = 0;
};

// Builds one instance: negatives from the retrieved list (optionally chunked,
// deduplicated, capped at retriever_top_k), similarity promotion, then the
// judge check when a judge is given. Without a judge every similarity
// promotion is kept.
RefinedInstance RefineCandidate(const corpus::CandidateRecord& c,
                                const corpus::BuildConfig& cfg,
                                judge::JudgeClient* judge,
                                size_t judge_max_in_flight = 4,
                                bool chunk_retrieved = false);

struct BuildDataResult {
  nlohmann::json report;
  size_t train = 0;
  size_t dev = 0;
  size_t malformed = 0;
};

// Writes train.jsonl, dev.jsonl and build_report.json under output_dir.
// Throws Error(kValidation) when more than max_malformed_fraction of the
// input lines are malformed or nothing usable remains.
BuildDataResult BuildData(const BuildDataOptions& opts, judge::JudgeClient* judge);

}  // namespace icrkit::pipeline
