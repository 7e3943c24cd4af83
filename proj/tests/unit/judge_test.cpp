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

#include <chrono>
#include <string>

#include "doctest.h"
#include "icrkit/error.hpp"
#include "icrkit/judge.hpp"

namespace icrkit::judge {
namespace {

TEST_CASE("ParsePromotionVerdict") {
  CHECK(ParsePromotionVerdict("yes") == true);
  CHECK(ParsePromotionVerdict("Relevant.") == true);
  CHECK(ParsePromotionVerdict("It mentions Delhi.\nVerdict: relevant") == true);
  CHECK(ParsePromotionVerdict("no") == false);
  CHECK(ParsePromotionVerdict("irrelevant") == false);
  CHECK(ParsePromotionVerdict("This passage is not relevant") == false);
  CHECK(ParsePromotionVerdict("Yes at first glance, but no.") == false);
  CHECK_FALSE(ParsePromotionVerdict("unclear").has_value());
  CHECK_FALSE(ParsePromotionVerdict("").has_value());
}

TEST_CASE("request digests are canonical") {
  const auto a = MakePromotionRequest("q", {"g1", "g2"}, "c");
  const auto b = MakePromotionRequest("q", {"g1", "g2"}, "c");
  const auto c = MakePromotionRequest("q", {"g1", "g2"}, "d");
  CHECK(a.Digest() == b.Digest());
  CHECK(a.Digest() != c.Digest());
  CHECK(a.Digest().size() == 64);
  CHECK(MakeReasoningRequest("q", {"g"}, "a", "s").kind == "reasoning");
}

TEST_CASE("RecordedJudge") {
  const auto req = MakePromotionRequest("q", {"g"}, "c");
  RecordedJudge exact(std::map<std::string, std::string>{{req.Digest(), "yes"}});
  CHECK(exact.Complete(req) == "yes");
  try {
    exact.Complete(MakePromotionRequest("q", {"g"}, "other"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
  RecordedJudge wildcard(std::map<std::string, std::string>{{req.Digest(), "yes"}, {"*", "no"}});
  CHECK(wildcard.Complete(req) == "yes");
  CHECK(wildcard.Complete(MakePromotionRequest("q", {"g"}, "other")) == "no");
}

TEST_CASE("MakeJudge") {
  JudgeConfig cfg;
  CHECK(MakeJudge(cfg) == nullptr);
  cfg.mode = JudgeMode::kRecorded;
  CHECK_THROWS_AS(MakeJudge(cfg), Error);
  cfg.mode = JudgeMode::kLive;
  CHECK_THROWS_AS(MakeJudge(cfg), Error);
  CHECK(ParseJudgeMode("recorded") == JudgeMode::kRecorded);
  CHECK_THROWS_AS(ParseJudgeMode("bogus"), Error);
}

TEST_CASE("dead live endpoint is a transport error after retries") {
  HttpJudgeOptions opts;
  opts.endpoint = "http://127.0.0.1:1";
  opts.model = "m";
  opts.timeout = std::chrono::milliseconds(300);
  opts.retries = 1;
  HttpJudge judge(opts);
  try {
    judge.Complete(MakePromotionRequest("q", {"g"}, "c"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTransport);
    CHECK(e.retryable());
  }
}

TEST_CASE("RenderPrompt mentions the payload") {
  const auto p = RenderPrompt(MakePromotionRequest("Where?", {"gold text"}, "cand"));
  CHECK(p.find("Where?") != std::string::npos);
  CHECK(p.find("cand") != std::string::npos);
}

}  // namespace
}  // namespace icrkit::judge
