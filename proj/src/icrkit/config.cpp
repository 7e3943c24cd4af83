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

#include "icrkit/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>

#include "icrkit/digest.hpp"
#include "icrkit/error.hpp"
#include "icrkit/jsonl.hpp"

namespace icrkit::config {

namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& msg) {
  throw Error(ErrorCode::kConfig, msg);
}

std::string_view ChunkUnitName(corpus::ChunkUnit u) {
  return u == corpus::ChunkUnit::kTokens ? "tokens" : "words";
}

corpus::ChunkUnit ParseChunkUnit(const std::string& s) {
  if (s == "words") return corpus::ChunkUnit::kWords;
  if (s == "tokens") return corpus::ChunkUnit::kTokens;
  Fail("chunk_unit must be 'words' or 'tokens', got '" + s + "'");
}

void CheckKeys(const json& j, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!j.is_object()) Fail(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) Fail("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T Get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail("bad value for '" + key + "': " + e.what());
  }
}

size_t GetCount(const json& j, const std::string& key) {
  const auto v = Get<long long>(j, key);
  if (v < 0) Fail("'" + key + "' must be non-negative");
  return static_cast<size_t>(v);
}

template <typename T>
T ParseNumber(const std::string& name, const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    Fail(name + " is not a valid number: '" + s + "'");
  }
  return v;
}

bool ParseBool(const std::string& name, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  Fail(name + " is not a boolean: '" + s + "'");
}

std::vector<std::filesystem::path> SplitPaths(const std::string& s) {
  std::vector<std::filesystem::path> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t colon = s.find(':', start);
    const std::string part =
        s.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    if (!part.empty()) out.emplace_back(part);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  return out;
}

}  // namespace

void RunConfig::Validate() const {
  Build().Validate();
  if (max_quote_tokens == 0) Fail("max_quote_tokens must be >= 1");
  if (ndcg_k == 0) Fail("ndcg_k must be >= 1");
  if (!(train_ratio > 0.0 && train_ratio <= 1.0)) {
    Fail("train_ratio must be in (0, 1]");
  }
  if (workers == 0) Fail("workers must be >= 1");
  if (judge_max_in_flight == 0) Fail("judge max_in_flight must be >= 1");
  for (const auto& p : corpus) {
    if (!std::filesystem::exists(p)) Fail("corpus file not found: " + p.string());
  }
  if (!token_counts.empty() && !std::filesystem::exists(token_counts)) {
    Fail("token_counts file not found: " + token_counts.string());
  }
  switch (judge.mode) {
    case judge::JudgeMode::kNone:
      break;
    case judge::JudgeMode::kRecorded:
      if (judge.fixture.empty()) Fail("judge mode 'recorded' needs judge.fixture");
      if (!std::filesystem::exists(judge.fixture)) {
        Fail("judge fixture not found: " + judge.fixture);
      }
      break;
    case judge::JudgeMode::kLive:
      if (judge.http.endpoint.empty()) Fail("judge mode 'live' needs judge.endpoint");
      if (judge.http.model.empty()) Fail("judge mode 'live' needs judge.model");
      break;
  }
}

corpus::BuildConfig RunConfig::Build() const {
  corpus::BuildConfig b;
  b.max_context_tokens = max_context_tokens;
  b.shuffle_seed = seed;
  b.retriever_top_k = retriever_top_k;
  b.fuzzy_threshold = fuzzy_threshold;
  b.chunk_unit = chunk_unit;
  b.chunk_size = chunk_size;
  b.ngram_n = ngram_n;
  return b;
}

rewards::RewardOptions RunConfig::Rewards() const {
  rewards::RewardOptions r;
  r.rules = normalization;
  r.max_quote_tokens = max_quote_tokens;
  return r;
}

nlohmann::json RunConfig::ToJson() const {
  json corpus_paths = json::array();
  for (const auto& p : corpus) corpus_paths.push_back(p.string());
  return json{
      {"corpus", corpus_paths},
      {"normalization",
       {{"lowercase", normalization.lowercase},
        {"strip_punctuation", normalization.strip_punctuation},
        {"remove_articles", normalization.remove_articles},
        {"collapse_whitespace", normalization.collapse_whitespace}}},
      {"fuzzy_threshold", fuzzy_threshold},
      {"ngram_n", ngram_n},
      {"max_quote_tokens", max_quote_tokens},
      {"ndcg_k", ndcg_k},
      {"build",
       {{"max_context_tokens", max_context_tokens},
        {"retriever_top_k", retriever_top_k},
        {"chunk_unit", ChunkUnitName(chunk_unit)},
        {"chunk_size", chunk_size},
        {"train_ratio", train_ratio},
        {"token_counts", token_counts.string()}}},
      {"judge",
       {{"mode", judge::JudgeModeName(judge.mode)},
        {"fixture", judge.fixture},
        {"endpoint", judge.http.endpoint},
        {"path", judge.http.path},
        {"model", judge.http.model},
        {"timeout_ms", judge.http.timeout.count()},
        {"retries", judge.http.retries},
        {"max_in_flight", judge_max_in_flight}}},
      {"seed", seed},
  };
}

std::string RunConfig::Digest() const { return Sha256Hex(jsonl::Dump(ToJson())); }

void ApplyJson(RunConfig& cfg, const nlohmann::json& j) {
  CheckKeys(j,
            {"corpus", "normalization", "fuzzy_threshold", "ngram_n",
             "max_quote_tokens", "ndcg_k", "build", "judge", "workers", "seed",
             "output_dir"},
            "config");
  if (j.contains("corpus")) {
    cfg.corpus.clear();
    const auto& c = j["corpus"];
    if (c.is_string()) {
      cfg.corpus.emplace_back(c.get<std::string>());
    } else {
      for (const auto& p : Get<std::vector<std::string>>(j, "corpus")) {
        cfg.corpus.emplace_back(p);
      }
    }
  }
  if (j.contains("normalization")) {
    const auto& n = j["normalization"];
    CheckKeys(n, {"lowercase", "strip_punctuation", "remove_articles",
                  "collapse_whitespace"},
              "normalization");
    if (n.contains("lowercase")) cfg.normalization.lowercase = Get<bool>(n, "lowercase");
    if (n.contains("strip_punctuation")) {
      cfg.normalization.strip_punctuation = Get<bool>(n, "strip_punctuation");
    }
    if (n.contains("remove_articles")) {
      cfg.normalization.remove_articles = Get<bool>(n, "remove_articles");
    }
    if (n.contains("collapse_whitespace")) {
      cfg.normalization.collapse_whitespace = Get<bool>(n, "collapse_whitespace");
    }
  }
  if (j.contains("fuzzy_threshold")) cfg.fuzzy_threshold = Get<double>(j, "fuzzy_threshold");
  if (j.contains("ngram_n")) cfg.ngram_n = Get<int>(j, "ngram_n");
  if (j.contains("max_quote_tokens")) cfg.max_quote_tokens = GetCount(j, "max_quote_tokens");
  if (j.contains("ndcg_k")) cfg.ndcg_k = GetCount(j, "ndcg_k");
  if (j.contains("workers")) cfg.workers = GetCount(j, "workers");
  if (j.contains("seed")) cfg.seed = Get<std::uint64_t>(j, "seed");
  if (j.contains("output_dir")) cfg.output_dir = Get<std::string>(j, "output_dir");
  if (j.contains("build")) {
    const auto& b = j["build"];
    CheckKeys(b, {"max_context_tokens", "retriever_top_k", "chunk_unit",
                  "chunk_size", "train_ratio", "token_counts"},
              "build");
    if (b.contains("max_context_tokens")) {
      cfg.max_context_tokens = GetCount(b, "max_context_tokens");
    }
    if (b.contains("retriever_top_k")) cfg.retriever_top_k = GetCount(b, "retriever_top_k");
    if (b.contains("chunk_unit")) cfg.chunk_unit = ParseChunkUnit(Get<std::string>(b, "chunk_unit"));
    if (b.contains("chunk_size")) cfg.chunk_size = GetCount(b, "chunk_size");
    if (b.contains("train_ratio")) cfg.train_ratio = Get<double>(b, "train_ratio");
    if (b.contains("token_counts")) cfg.token_counts = Get<std::string>(b, "token_counts");
  }
  if (j.contains("judge")) {
    const auto& jj = j["judge"];
    CheckKeys(jj, {"mode", "fixture", "endpoint", "path", "model", "api_key_env",
                   "timeout_ms", "retries", "max_in_flight"},
              "judge");
    if (jj.contains("mode")) cfg.judge.mode = judge::ParseJudgeMode(Get<std::string>(jj, "mode"));
    if (jj.contains("fixture")) cfg.judge.fixture = Get<std::string>(jj, "fixture");
    if (jj.contains("endpoint")) cfg.judge.http.endpoint = Get<std::string>(jj, "endpoint");
    if (jj.contains("path")) cfg.judge.http.path = Get<std::string>(jj, "path");
    if (jj.contains("model")) cfg.judge.http.model = Get<std::string>(jj, "model");
    if (jj.contains("api_key_env")) {
      const auto name = Get<std::string>(jj, "api_key_env");
      if (const char* v = std::getenv(name.c_str())) cfg.judge.http.api_key = v;
    }
    if (jj.contains("timeout_ms")) {
      cfg.judge.http.timeout = std::chrono::milliseconds(GetCount(jj, "timeout_ms"));
    }
    if (jj.contains("retries")) cfg.judge.http.retries = Get<int>(jj, "retries");
    if (jj.contains("max_in_flight")) {
      cfg.judge_max_in_flight = GetCount(jj, "max_in_flight");
      cfg.judge.http.max_in_flight = cfg.judge_max_in_flight;
    }
  }
}

void ApplyFile(RunConfig& cfg, const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(jsonl::ReadFile(path));
  } catch (const json::exception& e) {
    Fail("cannot parse config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    Fail(e.what());
  }
  ApplyJson(cfg, j);
}

EnvLookup ProcessEnv() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

void ApplyEnv(RunConfig& cfg, const EnvLookup& env) {
  auto get = [&](const char* key) { return env(std::string("ICRKIT_") + key); };
  if (auto v = get("CORPUS")) cfg.corpus = SplitPaths(*v);
  if (auto v = get("FUZZY_THRESHOLD")) cfg.fuzzy_threshold = ParseNumber<double>("ICRKIT_FUZZY_THRESHOLD", *v);
  if (auto v = get("NGRAM_N")) cfg.ngram_n = ParseNumber<int>("ICRKIT_NGRAM_N", *v);
  if (auto v = get("MAX_QUOTE_TOKENS")) cfg.max_quote_tokens = ParseNumber<size_t>("ICRKIT_MAX_QUOTE_TOKENS", *v);
  if (auto v = get("NDCG_K")) cfg.ndcg_k = ParseNumber<size_t>("ICRKIT_NDCG_K", *v);
  if (auto v = get("MAX_CONTEXT_TOKENS")) cfg.max_context_tokens = ParseNumber<size_t>("ICRKIT_MAX_CONTEXT_TOKENS", *v);
  if (auto v = get("RETRIEVER_TOP_K")) cfg.retriever_top_k = ParseNumber<size_t>("ICRKIT_RETRIEVER_TOP_K", *v);
  if (auto v = get("CHUNK_UNIT")) cfg.chunk_unit = ParseChunkUnit(*v);
  if (auto v = get("CHUNK_SIZE")) cfg.chunk_size = ParseNumber<size_t>("ICRKIT_CHUNK_SIZE", *v);
  if (auto v = get("TRAIN_RATIO")) cfg.train_ratio = ParseNumber<double>("ICRKIT_TRAIN_RATIO", *v);
  if (auto v = get("TOKEN_COUNTS")) cfg.token_counts = *v;
  if (auto v = get("REMOVE_ARTICLES")) cfg.normalization.remove_articles = ParseBool("ICRKIT_REMOVE_ARTICLES", *v);
  if (auto v = get("JUDGE_MODE")) cfg.judge.mode = judge::ParseJudgeMode(*v);
  if (auto v = get("JUDGE_FIXTURE")) cfg.judge.fixture = *v;
  if (auto v = get("JUDGE_ENDPOINT")) cfg.judge.http.endpoint = *v;
  if (auto v = get("JUDGE_MODEL")) cfg.judge.http.model = *v;
  if (auto v = get("JUDGE_API_KEY")) cfg.judge.http.api_key = *v;
  if (auto v = get("JUDGE_TIMEOUT_MS")) {
    cfg.judge.http.timeout = std::chrono::milliseconds(ParseNumber<long long>("ICRKIT_JUDGE_TIMEOUT_MS", *v));
  }
  if (auto v = get("JUDGE_MAX_IN_FLIGHT")) {
    cfg.judge_max_in_flight = ParseNumber<size_t>("ICRKIT_JUDGE_MAX_IN_FLIGHT", *v);
    cfg.judge.http.max_in_flight = cfg.judge_max_in_flight;
  }
  if (auto v = get("WORKERS")) cfg.workers = ParseNumber<size_t>("ICRKIT_WORKERS", *v);
  if (auto v = get("SEED")) cfg.seed = ParseNumber<std::uint64_t>("ICRKIT_SEED", *v);
  if (auto v = get("OUTPUT_DIR")) cfg.output_dir = *v;
}

}  // namespace icrkit::config
