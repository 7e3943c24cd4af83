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

// The five verifiable rewards. Every reward adds an answer indicator (sub-exact
// match of the extracted answer against any alias) to kind-specific terms:
//
//   AO       answer
//   ID       id  + answer                 id: declared ids == gold ids
//   ID_C     id  + content + answer       content: one block per gold doc,
//                                         each containing that doc's text
//   ID_Q     id  + quote + answer         quote: >= 1 quote, each <= 30
//                                         tokens and inside some gold doc
//   R_JUDGE  judge + answer               judge: reasoning + grounding
//                                         criteria (0..2); the judge's own
//                                         answer criterion is diagnostic only
//
// Parse failures score 0 for the affected term; they never fail the call.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icrkit/corpus.hpp"
#include "icrkit/judge.hpp"
#include "icrkit/matching.hpp"
#include "icrkit/parsing.hpp"
#include "json.hpp"

namespace icrkit::rewards {

enum class RewardKind { kAO, kID, kIDC, kIDQ, kRJudge };

inline constexpr RewardKind kAllRewardKinds[] = {
    RewardKind::kAO, RewardKind::kID, RewardKind::kIDC, RewardKind::kIDQ,
    RewardKind::kRJudge};

std::string_view RewardKindName(RewardKind kind);
// Accepts the canonical names (AO, ID, ID_C, ID_Q, R_JUDGE) and the "+"
// spellings (ID+C, ID+Q, R+JUDGE), case-insensitively.
std::optional<RewardKind> ParseRewardKind(std::string_view s);

struct RewardOptions {
  matching::NormalizationRules rules = matching::NormalizationRules::Answer();
  size_t max_quote_tokens = parsing::kMaxQuoteTokens;
};

struct RewardResult {
  RewardKind kind = RewardKind::kAO;
  double total = 0.0;
  int answer_indicator = 0;
  std::optional<int> id_indicator;
  std::optional<int> content_indicator;
  std::optional<int> quote_indicator;
  std::optional<int> judge_score;
  std::optional<int> judge_answer_criterion;
  parsing::ParsedOutput parsed;
  // Parser flags plus reward-level ones such as "judge_verdict_unparseable".
  std::vector<std::string> flags;

  bool operator==(const RewardResult&) const = default;
};

RewardResult RewardAnswerOnly(const corpus::ContextInstance& inst,
                              std::string_view y, const RewardOptions& opts = {});
RewardResult RewardIds(const corpus::ContextInstance& inst, std::string_view y,
                       const RewardOptions& opts = {});
RewardResult RewardIdsContent(const corpus::ContextInstance& inst,
                              std::string_view y, const RewardOptions& opts = {});
RewardResult RewardIdsQuotes(const corpus::ContextInstance& inst,
                             std::string_view y, const RewardOptions& opts = {});
// Judge transport failures propagate as Error(kTransport).
RewardResult RewardJudge(const corpus::ContextInstance& inst, std::string_view y,
                         judge::JudgeClient& judge, const RewardOptions& opts = {});

// Throws Error(kConfig) when kind is R_JUDGE and judge is null.
RewardResult ComputeReward(const corpus::ContextInstance& inst,
                           std::string_view y, RewardKind kind,
                           judge::JudgeClient* judge,
                           const RewardOptions& opts = {});

// {"total", "components", "flags", "diagnostics"}
nlohmann::json ToJson(const RewardResult& r);

}  // namespace icrkit::rewards
