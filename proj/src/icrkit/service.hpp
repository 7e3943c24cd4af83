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

// Reward scoring over newline-delimited JSON.
//
// Request:  {"request_id": str, "instance": {...} | "instance_id": str,
//            "output_text": str, "kind": "AO" | "ID" | "ID_C" | "ID_Q" | "R_JUDGE"}
// Response: {"request_id", "kind", "total", "components", "flags",
//            "diagnostics"}
// Error:    {"request_id", "error": {"code", "message", "line", "retryable"}}
//
// Prediction rows {"id", "output"} are accepted as shorthand for a request
// whose request_id and instance_id are both "id"; the kind then falls back to
// the service default.

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "icrkit/corpus.hpp"
#include "icrkit/error.hpp"
#include "icrkit/judge.hpp"
#include "icrkit/rewards.hpp"
#include "json.hpp"

namespace icrkit::service {

struct RewardRequest {
  std::string request_id;
  std::optional<corpus::ContextInstance> instance;
  std::string instance_id;
  std::string output_text;
  rewards::RewardKind kind = rewards::RewardKind::kAO;
};

// Throws Error(kValidation) for schema violations.
RewardRequest RequestFromJson(const nlohmann::json& j,
                              std::optional<rewards::RewardKind> default_kind);

// Reads instance files; duplicate ids raise Error(kValidation).
std::vector<corpus::ContextInstance> LoadInstances(
    const std::vector<std::filesystem::path>& paths);

// Immutable after construction; Handle* are safe to call concurrently.
class RewardService {
 public:
  RewardService(std::vector<corpus::ContextInstance> instances,
                rewards::RewardOptions options,
                std::shared_ptr<judge::JudgeClient> judge,
                std::optional<rewards::RewardKind> default_kind = std::nullopt);

  // Never throws; failures become error responses.
  nlohmann::json HandleLine(std::string_view line, size_t line_number) const;
  nlohmann::json HandleRequest(const nlohmann::json& request,
                               size_t line_number) const;
  rewards::RewardResult Score(const RewardRequest& request) const;

  bool has_judge() const { return judge_ != nullptr; }
  std::optional<rewards::RewardKind> default_kind() const { return default_kind_; }
  size_t corpus_size() const { return instances_.size(); }

 private:
  std::map<std::string, corpus::ContextInstance> instances_;
  rewards::RewardOptions options_;
  std::shared_ptr<judge::JudgeClient> judge_;
  std::optional<rewards::RewardKind> default_kind_;
};

bool IsErrorResponse(const nlohmann::json& response);
nlohmann::json ErrorResponse(const nlohmann::json& request_id, ErrorCode code,
                             const std::string& message, size_t line_number);

struct ServeStats {
  size_t requests = 0;
  size_t errors = 0;
};

// Pulls lines until next_line returns false, scores them on
// `workers` threads and passes every response line (without the newline) to
// write_line, one call at a time. Returns after all in-flight requests have
// been answered.
ServeStats Serve(const RewardService& svc,
                 const std::function<bool(std::string&)>& next_line,
                 const std::function<void(const std::string&)>& write_line,
                 size_t workers);

ServeStats ServeStream(const RewardService& svc, std::istream& in,
                       std::ostream& out, size_t workers);
ServeStats ServeFd(const RewardService& svc, int in_fd, int out_fd, size_t workers);

// One NDJSON stream per accepted connection.
class TcpServer {
 public:
  TcpServer(const RewardService& svc, size_t workers);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  // Binds and listens; port 0 picks an ephemeral port. Returns the bound port.
  std::uint16_t Listen(const std::string& host, std::uint16_t port);
  // Accepts until Stop(); then drains open connections.
  void Run();
  void Stop();

 private:
  const RewardService& svc_;
  size_t workers_;
  int listen_fd_ = -1;
  std::atomic<bool> stop_{false};
  std::mutex mu_;
  std::vector<int> connections_;
  std::vector<std::thread> threads_;
};

struct BatchOptions {
  std::filesystem::path requests;
  std::filesystem::path output;  // result lines
  size_t workers = 1;
};

struct BatchSummary {
  size_t requests = 0;
  size_t errors = 0;
  std::map<std::string, std::pair<double, size_t>> totals;  // kind -> (sum, n)

  // {"requests", "errors", "kinds": {kind: {"count", "mean_total"}}}
  nlohmann::json ToJson() const;
};

// Results are written in input order. Throws Error(kConfig) before scoring
// anything when a request needs a judge and none is configured.
BatchSummary RunBatch(const RewardService& svc, const BatchOptions& opts);

}  // namespace icrkit::service
