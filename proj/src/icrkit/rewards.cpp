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

#include "icrkit/rewards.hpp"

#include <algorithm>

#include "icrkit/error.hpp"
#include "icrkit/text.hpp"

namespace icrkit::rewards {

namespace {

using parsing::ParsedOutput;

bool SafeSubEm(std::string_view prediction, std::string_view gold,
               const matching::NormalizationRules& rules) {
  try {
    return matching::SubExactMatch(prediction, gold, rules);
  } catch (const Error&) {
    return false;
  }
}

int AnswerIndicator(const corpus::ContextInstance& inst, const ParsedOutput& p,
                    const RewardOptions& opts) {
  if (!p.answer || p.answer->empty()) return 0;
  for (const auto& alias : inst.answers) {
    if (SafeSubEm(*p.answer, alias, opts.rules)) return 1;
  }
  return 0;
}

int IdIndicator(const corpus::ContextInstance& inst, const ParsedOutput& p) {
  return p.doc_ids && *p.doc_ids == inst.gold_ids ? 1 : 0;
}

int ContentIndicator(const corpus::ContextInstance& inst, const ParsedOutput& p,
                     const RewardOptions& opts) {
  if (!p.contents || p.contents->size() != inst.gold_ids.size()) return 0;
  for (int g : inst.gold_ids) {
    const auto it = p.contents->find(g);
    if (it == p.contents->end()) return 0;
    if (!SafeSubEm(it->second, inst.documents[g].text, opts.rules)) return 0;
  }
  return 1;
}

int QuoteIndicator(const corpus::ContextInstance& inst, const ParsedOutput& p,
                   const RewardOptions& opts) {
  if (!p.quotes || p.quotes->empty()) return 0;
  for (const auto& q : *p.quotes) {
    if (matching::TokenCount(q) > opts.max_quote_tokens) return 0;
    const bool inside_gold =
        std::any_of(inst.gold_ids.begin(), inst.gold_ids.end(), [&](int g) {
          return SafeSubEm(inst.documents[g].text, q, opts.rules);
        });
    if (!inside_gold) return 0;
  }
  return 1;
}

RewardResult Start(RewardKind kind, const corpus::ContextInstance& inst,
                   std::string_view y, const RewardOptions& opts) {
  RewardResult r;
  r.kind = kind;
  r.parsed = parsing::ParseOutput(y, opts.max_quote_tokens);
  r.flags = r.parsed.flags.Names();
  r.answer_indicator = AnswerIndicator(inst, r.parsed, opts);
  return r;
}

void Finish(RewardResult& r) {
  int total = r.answer_indicator;
  for (const auto& c : {r.id_indicator, r.content_indicator, r.quote_indicator,
                        r.judge_score}) {
    total += c.value_or(0);
  }
  r.total = total;
}

}  // namespace

std::string_view RewardKindName(RewardKind kind) {
  switch (kind) {
    case RewardKind::kAO: return "AO";
    case RewardKind::kID: return "ID";
    case RewardKind::kIDC: return "ID_C";
    case RewardKind::kIDQ: return "ID_Q";
    case RewardKind::kRJudge: return "R_JUDGE";
  }
  return "AO";
}

std::optional<RewardKind> ParseRewardKind(std::string_view s) {
  std::string k = text::AsciiLower(text::Trim(s));
  std::replace(k.begin(), k.end(), '+', '_');
  if (k == "ao") return RewardKind::kAO;
  if (k == "id") return RewardKind::kID;
  if (k == "id_c") return RewardKind::kIDC;
  if (k == "id_q") return RewardKind::kIDQ;
  if (k == "r_judge") return RewardKind::kRJudge;
  return std::nullopt;
}

RewardResult RewardAnswerOnly(const corpus::ContextInstance& inst,
                              std::string_view y, const RewardOptions& opts) {
  auto r = Start(RewardKind::kAO, inst, y, opts);
  Finish(r);
  return r;
}

RewardResult RewardIds(const corpus::ContextInstance& inst, std::string_view y,
                       const RewardOptions& opts) {
  auto r = Start(RewardKind::kID, inst, y, opts);
  r.id_indicator = IdIndicator(inst, r.parsed);
  Finish(r);
  return r;
}

RewardResult RewardIdsContent(const corpus::ContextInstance& inst,
                              std::string_view y, const RewardOptions& opts) {
  auto r = Start(RewardKind::kIDC, inst, y, opts);
  r.id_indicator = IdIndicator(inst, r.parsed);
  r.content_indicator = ContentIndicator(inst, r.parsed, opts);
  Finish(r);
  return r;
}

RewardResult RewardIdsQuotes(const corpus::ContextInstance& inst,
                             std::string_view y, const RewardOptions& opts) {
  auto r = Start(RewardKind::kIDQ, inst, y, opts);
  r.id_indicator = IdIndicator(inst, r.parsed);
  r.quote_indicator = QuoteIndicator(inst, r.parsed, opts);
  Finish(r);
  return r;
}

RewardResult RewardJudge(const corpus::ContextInstance& inst, std::string_view y,
                         judge::JudgeClient& judge, const RewardOptions& opts) {
  auto r = Start(RewardKind::kRJudge, inst, y, opts);
  std::vector<std::string> gold_docs;
  for (int g : inst.gold_ids) gold_docs.push_back(inst.documents[g].text);
  const auto request = judge::MakeReasoningRequest(
      inst.question, gold_docs, inst.answers.front(), std::string(y));
  const std::string response = judge.Complete(request);
  try {
    const auto verdict = parsing::ParseJudgeVerdict(response);
    r.judge_score = verdict.reasoning_quality + verdict.document_grounding;
    r.judge_answer_criterion = verdict.answer_correctness;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    r.judge_score = 0;
    r.flags.emplace_back("judge_verdict_unparseable");
    r.parsed.notes.push_back(std::string("judge verdict: ") + e.what());
  }
  Finish(r);
  return r;
}

RewardResult ComputeReward(const corpus::ContextInstance& inst,
                           std::string_view y, RewardKind kind,
                           judge::JudgeClient* judge, const RewardOptions& opts) {
  switch (kind) {
    case RewardKind::kAO: return RewardAnswerOnly(inst, y, opts);
    case RewardKind::kID: return RewardIds(inst, y, opts);
    case RewardKind::kIDC: return RewardIdsContent(inst, y, opts);
    case RewardKind::kIDQ: return RewardIdsQuotes(inst, y, opts);
    case RewardKind::kRJudge:
      if (judge == nullptr) {
        throw Error(ErrorCode::kConfig, "R_JUDGE reward needs a judge client");
      }
      return RewardJudge(inst, y, *judge, opts);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown reward kind");
}

nlohmann::json ToJson(const RewardResult& r) {
  nlohmann::json components = {{"answer", r.answer_indicator}};
  auto put = [&](const char* key, const std::optional<int>& v) {
    if (v) components[key] = *v;
  };
  put("id", r.id_indicator);
  put("content", r.content_indicator);
  put("quote", r.quote_indicator);
  put("judge", r.judge_score);
  put("judge_answer_criterion", r.judge_answer_criterion);
  return {{"kind", RewardKindName(r.kind)},
          {"total", r.total},
          {"components", std::move(components)},
          {"flags", r.flags},
          {"diagnostics", parsing::ToJson(r.parsed)}};
}

}  // namespace icrkit::rewards
