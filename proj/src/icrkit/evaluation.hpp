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

// Benchmark scoring, attention-based document ranking, KV-retention
// simulation and the aggregate analyses (drop tables, NDCG, correlation).

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace icrkit::evaluation {

// 1 iff the prediction sub-exact-matches any alias. answers must be non-empty.
int SubemScore(std::string_view prediction,
               const std::vector<std::string>& answers);

struct McResult {
  int correct = 0;
  bool extracted = false;  // false: no choice could be read from the output
  char letter = 0;
};

// Reads a choice with a fixed cascade: the letter after the last "The correct
// answer is" / "The answer is" marker, then a bare leading letter, then a
// unique match of a choice text. gold_letter must be in A..D.
McResult McAccuracy(std::string_view prediction,
                    const std::vector<std::string>& choices, char gold_letter);

// LCS F-measure over normalized word tokens (articles kept).
double RougeL(std::string_view prediction, std::string_view reference);

struct TokenSpan {
  int doc = 0;
  size_t begin = 0;  // [begin, end) in token positions
  size_t end = 0;

  bool operator==(const TokenSpan&) const = default;
};

struct AttentionRecord {
  std::string instance_id;
  std::vector<TokenSpan> doc_spans;
  std::vector<double> token_scores;

  // Throws Error(kValidation) on overlapping/out-of-range spans or
  // negative/non-finite scores.
  void Validate() const;
};

// Attention dump row: {"id", "doc_spans": [[doc, start, end]], "token_scores"}.
AttentionRecord AttentionFromJson(const nlohmann::json& j);

enum class AttentionAggregation { kSum, kMean };

// Per-document attention mass, sorted by score descending then doc index.
std::vector<std::pair<int, double>> DocAttentionScores(
    const AttentionRecord& rec,
    AttentionAggregation agg = AttentionAggregation::kSum);

inline constexpr size_t kDefaultNdcgK = 10;

// Binary-gain NDCG@k with 1/log2(rank+1) discounts.
double NdcgAtK(std::span<const int> ranking, const std::set<int>& relevant,
               size_t k = kDefaultNdcgK);

struct Retention {
  std::vector<bool> retained;            // one flag per token
  std::map<int, double> survival;        // doc -> retained fraction of span
};

// Keeps the `budget` highest-scored tokens, ties to the lower position.
Retention SimulateTopKRetention(const AttentionRecord& rec, size_t budget);

// Row-major table of named metric values, e.g. model x task.
struct MetricTable {
  std::string row_header = "model";
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::map<std::string, std::map<std::string, double>> values;

  bool Has(const std::string& row, const std::string& col) const;
  double At(const std::string& row, const std::string& col) const;
  void Set(const std::string& row, const std::string& col, double v);
};

// Tab-separated; first line is the header, '#' lines are comments and
// "NA" cells are missing.
MetricTable ReadMetricTable(const std::filesystem::path& path);
std::string MetricTableToTsv(const MetricTable& t, int decimals = 1);

// (compressed - full) / full * 100. full must be > 0.
double DropPercent(double full, double compressed);
// Half away from zero, with -0.0 folded to 0.0.
double RoundTo(double v, int decimals);

struct DropTable {
  MetricTable drops;                 // raw signed percentages
  std::map<std::string, double> average;  // row -> mean of its drops
};

// Over the rows and columns the two tables share, in full's order.
DropTable ComputeDropTable(const MetricTable& full, const MetricTable& compressed);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;  // two-sided, t distribution with n-2 dof
};

// Throws Error(kInvalidArgument) when sizes differ, n < 3, or either input
// has zero variance.
PearsonResult Pearson(std::span<const double> x, std::span<const double> y);

struct GroupMean {
  std::string label;
  double mean = 0.0;
  size_t count = 0;
};

struct Aggregate {
  std::vector<GroupMean> groups;
  double average = 0.0;  // mean of the group means
};

// Groups whose labels all parse as context lengths (4k, 128k, 1M, 32768)
// sort numerically; otherwise lexicographically.
Aggregate AggregateByGroup(const std::map<std::string, std::vector<double>>& groups);

// "4k" -> 4096, "1M" -> 1048576, "512" -> 512; -1 when unparseable.
long long ParseContextLength(std::string_view label);

}  // namespace icrkit::evaluation
