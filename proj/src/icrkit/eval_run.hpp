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

// The eval and report commands: per-instance scoring over prediction files,
// attention-based ranking analyses, and table-level drop and correlation
// analyses.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "icrkit/corpus.hpp"
#include "icrkit/evaluation.hpp"
#include "json.hpp"

namespace icrkit::eval_run {

// Instance rows may carry extra fields used only by evaluation:
//   "group"        aggregation bucket, e.g. a context length ("4k")
//   "choices"      multiple-choice options, in A..D order
//   "gold_letter"  "A".."D"
//   "reference"    reference text for Rouge-L
struct EvalInstance {
  corpus::ContextInstance instance;
  std::string group = "all";
  std::vector<std::string> choices;
  std::optional<char> gold_letter;
  std::optional<std::string> reference;
};

EvalInstance EvalInstanceFromJson(const nlohmann::json& j);
std::vector<EvalInstance> LoadEvalInstances(const std::filesystem::path& path);

inline constexpr const char* kMetricSubem = "subem";
inline constexpr const char* kMetricMc = "mc";
inline constexpr const char* kMetricRouge = "rouge_l";
inline constexpr const char* kMetricNdcg = "ndcg";
inline constexpr const char* kMetricRetention = "retention";

struct EvalOptions {
  std::filesystem::path instances;
  std::filesystem::path predictions;  // {"id", "output"} rows
  std::filesystem::path attention;    // optional attention dump
  // Empty: every metric the inputs support.
  std::vector<std::string> metrics;
  size_t ndcg_k = evaluation::kDefaultNdcgK;
  evaluation::AttentionAggregation aggregation = evaluation::AttentionAggregation::kSum;
  double retention_fraction = 0.1;  // budget = round(fraction * tokens)
  std::filesystem::path output_dir;
  std::string run_id;
  size_t workers = 1;
};

// Writes report.json, per_instance.tsv, aggregates.tsv and, with attention
// input, ndcg.tsv. Requesting a metric whose inputs are absent raises
// Error(kConfig). Returns the report.
nlohmann::json RunEval(const EvalOptions& opts);

struct ReportOptions {
  std::filesystem::path full;        // metric table, full context
  std::filesystem::path compressed;  // metric table, compressed cache
  std::vector<std::string> exclude_columns;

  std::filesystem::path corr_x;
  std::string corr_x_column = "Avg";
  std::filesystem::path corr_y;
  std::string corr_y_column = "Avg";

  std::filesystem::path output_dir;
  int decimals = 1;
};

// Drop table (drop_table.tsv) when full and compressed are set; correlation
// (correlation.tsv) when corr_x and corr_y are set. Rows are matched by label.
nlohmann::json RunReport(const ReportOptions& opts);

}  // namespace icrkit::eval_run
