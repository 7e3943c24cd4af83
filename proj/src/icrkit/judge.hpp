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

// LLM judge clients. Two request kinds are issued:
//   "reasoning"  scores a reasoning-style answer against three binary
//                criteria; payload {question, gold_docs, answer, solution}
//   "promotion"  asks whether a near-duplicate passage is relevant;
//                payload {question, gold_docs, candidate}
// Recorded mode replays fixture responses keyed by the SHA-256 of the
// canonical request JSON.

#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace icrkit::judge {

struct JudgeRequest {
  std::string kind;
  nlohmann::json payload;

  nlohmann::json ToJson() const;
  std::string Digest() const;
};

JudgeRequest MakeReasoningRequest(const std::string& question,
                                  const std::vector<std::string>& gold_docs,
                                  const std::string& answer,
                                  const std::string& solution);
JudgeRequest MakePromotionRequest(const std::string& question,
                                  const std::vector<std::string>& gold_docs,
                                  const std::string& candidate);

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  // Returns the judge's raw response. Throws Error(kTransport) on retryable
  // failures.
  virtual std::string Complete(const JudgeRequest& request) = 0;
};

// Replays responses from a fixture file of JSON lines
// {"request_digest": str, "response_text": str}. A digest of "*" is the
// fallback for requests without their own entry.
class RecordedJudge : public JudgeClient {
 public:
  explicit RecordedJudge(std::map<std::string, std::string> responses);
  static std::unique_ptr<RecordedJudge> FromFile(
      const std::filesystem::path& path);

  std::string Complete(const JudgeRequest& request) override;

 private:
  std::map<std::string, std::string> responses_;
};

// Bounds concurrent calls.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(size_t limit) : limit_(limit == 0 ? 1 : limit) {}
  void Acquire();
  void Release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  size_t limit_;
  size_t in_flight_ = 0;
};

struct HttpJudgeOptions {
  std::string endpoint;  // e.g. http://localhost:8000
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
  size_t max_in_flight = 8;
  int retries = 2;
};

// OpenAI-compatible chat-completions client.
class HttpJudge : public JudgeClient {
 public:
  explicit HttpJudge(HttpJudgeOptions options);
  std::string Complete(const JudgeRequest& request) override;

 private:
  HttpJudgeOptions options_;
  InFlightLimiter limiter_;
};

// Renders the prompt sent to a live judge.
std::string RenderPrompt(const JudgeRequest& request);

enum class JudgeMode { kNone, kRecorded, kLive };

struct JudgeConfig {
  JudgeMode mode = JudgeMode::kNone;
  std::string fixture;
  HttpJudgeOptions http;
};

JudgeMode ParseJudgeMode(const std::string& s);
std::string JudgeModeName(JudgeMode mode);

// Returns nullptr for kNone. Throws Error(kConfig) for incomplete settings.
std::shared_ptr<JudgeClient> MakeJudge(const JudgeConfig& config);

// Verdict for a promotion request: true keeps the promotion, false drops it,
// nullopt when no verdict word is present.
std::optional<bool> ParsePromotionVerdict(const std::string& response);

}  // namespace icrkit::judge
