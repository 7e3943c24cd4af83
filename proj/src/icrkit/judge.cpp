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

#include "icrkit/judge.hpp"

#include <cctype>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "icrkit/digest.hpp"
#include "icrkit/error.hpp"
#include "icrkit/jsonl.hpp"

namespace icrkit::judge {

namespace {

std::string JoinDocs(const nlohmann::json& docs) {
  std::string out;
  int i = 1;
  for (const auto& d : docs) {
    out += "(" + std::to_string(i++) + ") " + d.get<std::string>() + "\n";
  }
  return out;
}

class LimiterGuard {
 public:
  explicit LimiterGuard(InFlightLimiter& l) : l_(l) { l_.Acquire(); }
  ~LimiterGuard() { l_.Release(); }
  LimiterGuard(const LimiterGuard&) = delete;
  LimiterGuard& operator=(const LimiterGuard&) = delete;

 private:
  InFlightLimiter& l_;
};

}  // namespace

nlohmann::json JudgeRequest::ToJson() const {
  return nlohmann::json{{"kind", kind}, {"payload", payload}};
}

std::string JudgeRequest::Digest() const { return Sha256Hex(jsonl::Dump(ToJson())); }

JudgeRequest MakeReasoningRequest(const std::string& question,
                                  const std::vector<std::string>& gold_docs,
                                  const std::string& answer,
                                  const std::string& solution) {
  return {"reasoning",
          nlohmann::json{{"question", question},
                         {"gold_docs", gold_docs},
                         {"answer", answer},
                         {"solution", solution}}};
}

JudgeRequest MakePromotionRequest(const std::string& question,
                                  const std::vector<std::string>& gold_docs,
                                  const std::string& candidate) {
  return {"promotion", nlohmann::json{{"question", question},
                                      {"gold_docs", gold_docs},
                                      {"candidate", candidate}}};
}

RecordedJudge::RecordedJudge(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

std::unique_ptr<RecordedJudge> RecordedJudge::FromFile(
    const std::filesystem::path& path) {
  std::map<std::string, std::string> responses;
  const auto errors = jsonl::ForEach(path, [&](const nlohmann::json& j, size_t) {
    responses[j.at("request_digest").get<std::string>()] =
        j.at("response_text").get<std::string>();
  });
  if (!errors.empty()) {
    throw Error(ErrorCode::kConfig,
                "judge fixture " + path.string() + " line " +
                    std::to_string(errors.front().line) + ": " +
                    errors.front().message);
  }
  return std::make_unique<RecordedJudge>(std::move(responses));
}

std::string RecordedJudge::Complete(const JudgeRequest& request) {
  if (auto it = responses_.find(request.Digest()); it != responses_.end()) {
    return it->second;
  }
  if (auto it = responses_.find("*"); it != responses_.end()) return it->second;
  throw Error(ErrorCode::kNotFound,
              "no recorded judge response for digest " + request.Digest());
}

void InFlightLimiter::Acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
}

void InFlightLimiter::Release() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

std::string RenderPrompt(const JudgeRequest& request) {
  const auto& p = request.payload;
  std::ostringstream s;
  if (request.kind == "promotion") {
    s << "A question comes with passages known to support its answer. Decide "
         "whether the candidate passage also contains information needed to "
         "answer the question.\n\n"
      << "Question: " << p.at("question").get<std::string>() << "\n\n"
      << "Supporting passages:\n" << JoinDocs(p.at("gold_docs")) << "\n"
      << "Candidate passage:\n" << p.at("candidate").get<std::string>()
      << "\n\nReply with a short justification, then a final line containing "
         "only \"relevant\" or \"irrelevant\".";
    return s.str();
  }
  s << "Grade a model's solution to a question that was answered from a large "
       "pool of documents, only some of which matter.\n\n"
    << "Question: " << p.at("question").get<std::string>() << "\n\n"
    << "Relevant documents:\n" << JoinDocs(p.at("gold_docs")) << "\n"
    << "Reference answer: " << p.at("answer").get<std::string>() << "\n\n"
    << "Model solution:\n" << p.at("solution").get<std::string>() << "\n\n"
    << "Score each criterion 0 or 1 after a one-sentence justification.\n"
       "Criterion 1, reasoning quality: the argument is coherent and moves "
       "from evidence to conclusion without contradictions.\n"
       "Criterion 2, document grounding: the solution draws on the relevant "
       "documents and represents them faithfully.\n"
       "Criterion 3, answer correctness: the final answer agrees with the "
       "reference answer.\n\n"
       "Finish with exactly:\n"
       "\\boxed{Criterion 1: <0 or 1>}\n"
       "\\boxed{Criterion 2: <0 or 1>}\n"
       "\\boxed{Criterion 3: <0 or 1>}\n";
  return s.str();
}

HttpJudge::HttpJudge(HttpJudgeOptions options)
    : options_(std::move(options)), limiter_(options_.max_in_flight) {}

std::string HttpJudge::Complete(const JudgeRequest& request) {
  const nlohmann::json body = {
      {"model", options_.model},
      {"temperature", 0.0},
      {"messages", nlohmann::json::array({nlohmann::json{
                       {"role", "user"}, {"content", RenderPrompt(request)}}})}};
  LimiterGuard guard(limiter_);
  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
    }
    httplib::Client client(options_.endpoint);
    const auto secs = options_.timeout.count() / 1000;
    const auto usecs = (options_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    auto res = client.Post(options_.path, headers, body.dump(),
                           "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kConfig, "judge endpoint returned HTTP " +
                                          std::to_string(res->status));
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const std::exception& e) {
      last_error = std::string("bad judge reply: ") + e.what();
    }
  }
  throw Error(ErrorCode::kTransport, "judge request failed after " +
                                         std::to_string(options_.retries + 1) +
                                         " attempts: " + last_error);
}

JudgeMode ParseJudgeMode(const std::string& s) {
  if (s == "none" || s.empty()) return JudgeMode::kNone;
  if (s == "recorded") return JudgeMode::kRecorded;
  if (s == "live") return JudgeMode::kLive;
  throw Error(ErrorCode::kConfig, "unknown judge mode '" + s + "'");
}

std::string JudgeModeName(JudgeMode mode) {
  switch (mode) {
    case JudgeMode::kNone: return "none";
    case JudgeMode::kRecorded: return "recorded";
    case JudgeMode::kLive: return "live";
  }
  return "none";
}

std::shared_ptr<JudgeClient> MakeJudge(const JudgeConfig& config) {
  switch (config.mode) {
    case JudgeMode::kNone:
      return nullptr;
    case JudgeMode::kRecorded:
      if (config.fixture.empty()) {
        throw Error(ErrorCode::kConfig, "recorded judge needs a fixture path");
      }
      return RecordedJudge::FromFile(config.fixture);
    case JudgeMode::kLive:
      if (config.http.endpoint.empty()) {
        throw Error(ErrorCode::kConfig, "live judge needs an endpoint");
      }
      return std::make_shared<HttpJudge>(config.http);
  }
  return nullptr;
}

std::optional<bool> ParsePromotionVerdict(const std::string& response) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : response) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  for (size_t i = words.size(); i-- > 0;) {
    const auto& w = words[i];
    const bool negated = i > 0 && words[i - 1] == "not";
    if (w == "yes" || w == "relevant" || w == "true") return !negated;
    if (w == "no" || w == "irrelevant" || w == "false") return false;
  }
  return std::nullopt;
}

}  // namespace icrkit::judge
