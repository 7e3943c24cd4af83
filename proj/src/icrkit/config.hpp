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

// Run configuration shared by every CLI subcommand and the service.
//
// Precedence, lowest to highest: built-in defaults, the JSON config file,
// ICRKIT_* environment variables, command-line flags.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "icrkit/corpus.hpp"
#include "icrkit/judge.hpp"
#include "icrkit/matching.hpp"
#include "icrkit/rewards.hpp"
#include "json.hpp"

namespace icrkit::config {

struct RunConfig {
  std::vector<std::filesystem::path> corpus;  // instance files
  matching::NormalizationRules normalization;
  double fuzzy_threshold = 0.6;
  int ngram_n = matching::kDefaultNgram;
  size_t max_quote_tokens = parsing::kMaxQuoteTokens;
  size_t ndcg_k = 10;

  size_t max_context_tokens = 32768;
  size_t retriever_top_k = 500;
  corpus::ChunkUnit chunk_unit = corpus::ChunkUnit::kWords;
  size_t chunk_size = 100;
  double train_ratio = 0.95;
  std::filesystem::path token_counts;  // optional sidecar

  judge::JudgeConfig judge;
  size_t judge_max_in_flight = 4;

  size_t workers = 4;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "icrkit-out";

  // Throws Error(kConfig).
  void Validate() const;

  corpus::BuildConfig Build() const;
  rewards::RewardOptions Rewards() const;

  // Everything that can change an output byte. Excludes the API key, the
  // worker count and the output directory.
  nlohmann::json ToJson() const;
  std::string Digest() const;
};

// Keys not listed in ToJson() are rejected with Error(kConfig).
void ApplyJson(RunConfig& cfg, const nlohmann::json& j);
void ApplyFile(RunConfig& cfg, const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup ProcessEnv();
// Reads ICRKIT_<KEY> for every scalar setting; ICRKIT_CORPUS is a
// colon-separated list.
void ApplyEnv(RunConfig& cfg, const EnvLookup& env = ProcessEnv());

}  // namespace icrkit::config
