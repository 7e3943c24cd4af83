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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icrkit/corpus.hpp"
#include "icrkit/error.hpp"
#include "icrkit/evaluation.hpp"
#include "icrkit/jsonl.hpp"
#include "icrkit/judge.hpp"
#include "icrkit/parsing.hpp"
#include "icrkit/pipeline.hpp"
#include "icrkit/rewards.hpp"

namespace {

namespace fs = std::filesystem;
using icrkit::corpus::ContextInstance;
using icrkit::corpus::Document;
using icrkit::corpus::Origin;
using icrkit::rewards::RewardKind;
using nlohmann::json;

const fs::path kData = ICRKIT_TEST_DATA_DIR;
const fs::path kReference = ICRKIT_REFERENCE_DIR;

// Tolerances.
constexpr double kCorrR = -0.09;
constexpr double kCorrRTol = 0.01;
constexpr double kCorrP = 0.86;
constexpr double kCorrPTol = 0.02;
constexpr double kDropTol = 0.1 + 1e-9;
constexpr double kNdcgTol = 1e-12;
constexpr size_t kMinOraclePairs = 200;
constexpr double kCorrBudgetS = 1.0;
constexpr double kDropBudgetS = 1.0;
constexpr double kOracleBudgetS = 10.0;
constexpr double kParserBudgetS = 30.0;
constexpr double kNdcgBudgetS = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void Run(const std::string& name, const std::function<Outcome()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++g_failures;
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.3fs", secs);
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " ["
            << timing << "]" << std::endl;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string Fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Correlation

Outcome Correlation() {
  const auto start = std::chrono::steady_clock::now();
  const auto x = icrkit::evaluation::ReadMetricTable(kReference / "ranking_ndcg.tsv");
  const auto y = icrkit::evaluation::ReadMetricTable(kReference / "in_domain_subem.tsv");
  std::vector<double> xs, ys;
  for (const auto& row : x.rows) {
    xs.push_back(x.At(row, "Avg"));
    ys.push_back(y.At(row, "Avg"));
  }
  const auto r = icrkit::evaluation::Pearson(xs, ys);
  const double secs = Seconds(start);
  const bool ok = std::abs(r.r - kCorrR) <= kCorrRTol &&
                  std::abs(r.p - kCorrP) <= kCorrPTol && secs < kCorrBudgetS;
  return {ok, "n=" + std::to_string(xs.size()) + " r=" + Fixed(r.r, 4) +
                  " p=" + Fixed(r.p, 4) + " (want r=-0.09+-0.01, p=0.86+-0.02)"};
}

// ---------------------------------------------------------------------------
// Drop table

Outcome DropTable() {
  const auto start = std::chrono::steady_clock::now();
  namespace ev = icrkit::evaluation;
  const auto full = ev::ReadMetricTable(kReference / "ood_full_context.tsv");
  const auto ra = ev::ReadMetricTable(kReference / "ood_retrieval_attention.tsv");
  const auto published = ev::ReadMetricTable(kReference / "published_drops.tsv");
  const auto table = ev::ComputeDropTable(full, ra);
  const std::vector<std::string> cols = {"MC", "Sum", "ALL", "Fin"};
  size_t checked = 0;
  std::vector<std::string> mismatches;
  for (const auto& row : full.rows) {
    for (const auto& col : cols) {
      const double got = ev::RoundTo(table.drops.At(row, col), 1);
      const double want = published.At(row, col);
      ++checked;
      if (std::abs(got - want) > kDropTol) {
        mismatches.push_back(row + "/" + col + " " + Fixed(got, 1) + " vs " +
                             Fixed(want, 1));
      }
    }
  }
  const double secs = Seconds(start);
  std::string detail = std::to_string(checked - mismatches.size()) + "/" +
                       std::to_string(checked) + " cells within 0.1";
  for (const auto& m : mismatches) detail += "; " + m;
  return {mismatches.empty() && secs < kDropBudgetS, detail};
}

// ---------------------------------------------------------------------------
// Reward oracle

// Literal answer normalization: lowercase, delete ASCII punctuation, replace
// the articles a/an/the by spaces, collapse whitespace.
std::string OracleNormalize(const std::string& s) {
  std::string t;
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    t.push_back(static_cast<char>(std::tolower(c)));
  }
  static const std::regex kArticles("\\b(a|an|the)\\b");
  t = std::regex_replace(t, kArticles, " ");
  std::istringstream in(t);
  std::string w, out;
  while (in >> w) out += (out.empty() ? "" : " ") + w;
  return out;
}

bool OracleContains(const std::string& haystack, const std::string& needle) {
  const std::string n = OracleNormalize(needle);
  return !n.empty() && OracleNormalize(haystack).find(n) != std::string::npos;
}

size_t OracleTokens(const std::string& s) {
  std::istringstream in(s);
  std::string w;
  size_t n = 0;
  while (in >> w) ++n;
  return n;
}

enum class AnswerVariant { kCorrect, kEmbedded, kWrong, kMissing };
constexpr AnswerVariant kAnswerVariants[] = {
    AnswerVariant::kCorrect, AnswerVariant::kEmbedded, AnswerVariant::kWrong,
    AnswerVariant::kMissing};

struct OracleCase {
  std::string output;
  int expected_total = 0;
  std::map<std::string, int> expected_components;
  std::string judge_response;  // R_JUDGE only
};

struct OracleInstance {
  ContextInstance inst;
  std::string wrong_answer;
  std::vector<std::set<int>> id_sets;  // declared id sets to enumerate
};

std::string AnswerText(const OracleInstance& o, AnswerVariant v) {
  switch (v) {
    case AnswerVariant::kCorrect: return o.inst.answers.front();
    case AnswerVariant::kEmbedded:
      return "probably " + o.inst.answers.back() + ", judging by the context";
    case AnswerVariant::kWrong: return o.wrong_answer;
    case AnswerVariant::kMissing: return "";
  }
  return "";
}

int OracleAnswer(const OracleInstance& o, AnswerVariant v) {
  if (v == AnswerVariant::kMissing) return 0;
  const std::string a = AnswerText(o, v);
  for (const auto& alias : o.inst.answers) {
    if (OracleContains(a, alias)) return 1;
  }
  return 0;
}

std::string AnswerLine(const OracleInstance& o, AnswerVariant v) {
  if (v == AnswerVariant::kMissing) return "";
  return "The answer is: " + AnswerText(o, v);
}

std::string TagList(const std::set<int>& ids) {
  if (ids.empty()) return "[DOC -1]";
  std::string s;
  for (int i : ids) s += (s.empty() ? "" : ", ") + ("[DOC " + std::to_string(i) + "]");
  return s;
}

std::string Words(const std::string& text, size_t from, size_t count) {
  std::istringstream in(text);
  std::vector<std::string> w;
  std::string t;
  while (in >> t) w.push_back(t);
  std::string out;
  for (size_t i = from; i < std::min(w.size(), from + count); ++i) {
    out += (out.empty() ? "" : " ") + w[i];
  }
  return out;
}

void AddIdCases(const OracleInstance& o, std::vector<OracleCase>& out) {
  for (const auto& ids : o.id_sets) {
    for (bool mixed : {false, true}) {
      if (mixed && ids.empty()) continue;
      for (auto v : kAnswerVariants) {
        std::string list = TagList(ids);
        if (mixed) list += ", [DOC -1]";
        OracleCase c;
        c.output = list + "\n" + AnswerLine(o, v) + (v == AnswerVariant::kMissing ? "" : ".");
        const int id = !mixed && ids == o.inst.gold_ids;
        const int ans = OracleAnswer(o, v);
        c.expected_components = {{"id", id}, {"answer", ans}};
        c.expected_total = id + ans;
        out.push_back(std::move(c));
      }
    }
  }
}

enum class ContentMode { kExact, kTruncatedFirst, kPadded };

void AddContentCases(const OracleInstance& o, std::vector<OracleCase>& out) {
  for (const auto& blocks : o.id_sets) {
    for (auto mode : {ContentMode::kExact, ContentMode::kTruncatedFirst,
                      ContentMode::kPadded}) {
      for (auto v : kAnswerVariants) {
        std::string y = "Relevant documents:\n";
        std::map<int, std::string> written;
        bool first = true;
        for (int b : blocks) {
          const std::string& text = o.inst.documents[b].text;
          std::string body = text;
          if (mode == ContentMode::kTruncatedFirst && first) {
            body = Words(text, 0, OracleTokens(text) / 2);
          } else if (mode == ContentMode::kPadded) {
            body = "Reproduced: " + text + " (end of document)";
          }
          first = false;
          written[b] = body;
          y += "[DOC " + std::to_string(b) + "]\n" + body + "\n\n";
        }
        y += AnswerLine(o, v);
        int content = written.size() == o.inst.gold_ids.size() ? 1 : 0;
        for (int g : o.inst.gold_ids) {
          const auto it = written.find(g);
          if (it == written.end() ||
              !OracleContains(it->second, o.inst.documents[g].text)) {
            content = 0;
          }
        }
        // The block tags are the id declaration; no blocks means none.
        const int id = !blocks.empty() && blocks == o.inst.gold_ids;
        const int ans = OracleAnswer(o, v);
        OracleCase c;
        c.output = y;
        c.expected_components = {{"id", id}, {"content", content}, {"answer", ans}};
        c.expected_total = id + content + ans;
        out.push_back(std::move(c));
      }
    }
  }
}

enum class QuoteMode { kGoldSpans, kGold30, kGold31, kNegative, kNone };

void AddQuoteCases(const OracleInstance& o, std::vector<OracleCase>& out) {
  int negative = -1;
  for (const auto& d : o.inst.documents) {
    if (!o.inst.gold_ids.count(d.index)) negative = d.index;
  }
  const int gold = *o.inst.gold_ids.begin();
  for (const auto& ids : o.id_sets) {
    for (auto mode : {QuoteMode::kGoldSpans, QuoteMode::kGold30, QuoteMode::kGold31,
                      QuoteMode::kNegative, QuoteMode::kNone}) {
      std::vector<std::string> quotes;
      switch (mode) {
        case QuoteMode::kGoldSpans:
          for (int g : o.inst.gold_ids) {
            quotes.push_back(Words(o.inst.documents[g].text, 1, 4));
          }
          break;
        case QuoteMode::kGold30:
          quotes.push_back(Words(o.inst.documents[gold].text, 0, 30));
          break;
        case QuoteMode::kGold31:
          quotes.push_back(Words(o.inst.documents[gold].text, 0, 31));
          break;
        case QuoteMode::kNegative:
          quotes.push_back(negative >= 0 ? Words(o.inst.documents[negative].text, 0, 5)
                                         : "text found nowhere in context");
          quotes.push_back(Words(o.inst.documents[gold].text, 0, 3));
          break;
        case QuoteMode::kNone:
          break;
      }
      for (auto v : kAnswerVariants) {
        std::string y;
        for (size_t q = 0; q < quotes.size(); ++q) {
          y += "Quote " + std::to_string(q + 1) + ": \"" + quotes[q] + "\"\n";
        }
        y += "\nRelevant Document IDs: " + TagList(ids) + "\n\n" + AnswerLine(o, v);
        int quote = quotes.empty() ? 0 : 1;
        for (const auto& q : quotes) {
          bool inside = false;
          for (int g : o.inst.gold_ids) {
            inside |= OracleContains(o.inst.documents[g].text, q);
          }
          if (!inside || OracleTokens(q) > 30) quote = 0;
        }
        const int id = ids == o.inst.gold_ids;
        const int ans = OracleAnswer(o, v);
        OracleCase c;
        c.output = y;
        c.expected_components = {{"id", id}, {"quote", quote}, {"answer", ans}};
        c.expected_total = id + quote + ans;
        out.push_back(std::move(c));
      }
    }
  }
}

struct Verdict {
  int c1, c2, c3;
  bool parseable;
};

void AddJudgeCases(const OracleInstance& o, std::vector<OracleCase>& out) {
  const Verdict verdicts[] = {{1, 1, 1, true}, {1, 0, 1, true}, {0, 1, 0, true},
                              {0, 0, 0, true}, {1, 1, 1, false}};
  for (const auto& cited : o.id_sets) {
    for (const auto& vd : verdicts) {
      for (auto v : kAnswerVariants) {
        std::string y = "**Step 1: Question Analysis**\nThe question asks for one fact.\n\n"
                        "**Step 2: Document Review**\n";
        for (int i : cited) y += "According to [DOC " + std::to_string(i) + "], it helps.\n";
        y += "\n**Step 3: Reasoning**\nCombining the evidence.\n\n**Step 4: Answer**\n" +
             AnswerLine(o, v);
        OracleCase c;
        c.output = y;
        c.judge_response =
            vd.parseable ? "\\boxed{Criterion 1: " + std::to_string(vd.c1) +
                               "}\n\\boxed{Criterion 2: " + std::to_string(vd.c2) +
                               "}\n\\boxed{Criterion 3: " + std::to_string(vd.c3) + "}"
                         : "The verdict is favourable.";
        const int judge = vd.parseable ? vd.c1 + vd.c2 : 0;
        const int ans = OracleAnswer(o, v);
        c.expected_components = {{"judge", judge}, {"answer", ans}};
        c.expected_total = judge + ans;
        out.push_back(std::move(c));
      }
    }
  }
}

void AddAnswerOnlyCases(const OracleInstance& o, std::vector<OracleCase>& out) {
  for (auto v : kAnswerVariants) {
    OracleCase c;
    c.output = "Looking at [DOC 0] first.\n" + AnswerLine(o, v);
    const int ans = OracleAnswer(o, v);
    c.expected_components = {{"answer", ans}};
    c.expected_total = ans;
    out.push_back(std::move(c));
  }
}

// Doc i is 34 distinct words that share nothing with any other document.
std::string SyntheticDoc(int i) {
  std::string s;
  const char letter = static_cast<char>('a' + i % 26);
  const char second = static_cast<char>('a' + i / 26);
  for (int k = 0; k < 34; ++k) {
    s += (k ? " " : "") + std::string("w") + letter + second + "q" + std::to_string(k);
  }
  return s;
}

ContextInstance MakeInstance(const std::string& id, const std::string& question,
                             std::vector<std::string> answers,
                             const std::vector<std::string>& texts,
                             const std::set<int>& gold) {
  ContextInstance inst;
  inst.id = id;
  inst.question = question;
  inst.answers = std::move(answers);
  for (size_t i = 0; i < texts.size(); ++i) {
    inst.documents.push_back({static_cast<int>(i), texts[i],
                              gold.count(static_cast<int>(i)) ? Origin::kGold
                                                              : Origin::kHardNegative});
  }
  inst.gold_ids = gold;
  inst.Validate();
  return inst;
}

std::vector<std::set<int>> AllSubsets(int n) {
  std::vector<std::set<int>> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::set<int> s;
    for (int i = 0; i < n; ++i) {
      if (mask & (1 << i)) s.insert(i);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<OracleInstance> OracleInstances() {
  std::vector<OracleInstance> out;
  // Every gold set over 1..4 documents, with every declared subset.
  for (int n = 1; n <= 4; ++n) {
    std::vector<std::string> texts;
    for (int i = 0; i < n; ++i) texts.push_back(SyntheticDoc(i));
    for (const auto& gold : AllSubsets(n)) {
      if (gold.empty()) continue;
      OracleInstance o;
      o.inst = MakeInstance("s" + std::to_string(out.size()), "Which value?",
                            {"The Blue Lagoon", "Blue Lagoon Iceland"}, texts, gold);
      o.wrong_answer = "the red harbour";
      o.id_sets = AllSubsets(n);
      out.push_back(std::move(o));
    }
  }

  // The three worked training examples, with a restricted set of declarations.
  auto restricted = [](const std::set<int>& gold, int negative) {
    std::set<int> minus = gold;
    minus.erase(minus.begin());
    std::set<int> plus = gold;
    plus.insert(negative);
    return std::vector<std::set<int>>{gold, minus, plus, {}, {negative}};
  };
  {
    std::vector<std::string> t = {
        "British art critics", "The English Woman's Journal", "1300 subscribers",
        "Magazines published in UK", "French male writers", "Published in USA",
        "Magazines with year", "Feminism and family", "UK Monthly magazines",
        "(magazine)",
        "Arthur's Magazine (1844-1846) was an American literary periodical "
        "published in Philadelphia in the 19th century.",
        "First for Women is a woman's magazine published by Bauer Media Group "
        "in the USA. The magazine was started in 1989."};
    OracleInstance o;
    o.inst = MakeInstance("magazines",
                          "Which magazine was started first Arthur's Magazine or "
                          "First for Women?",
                          {"Arthur's Magazine"}, t, {10, 11});
    o.wrong_answer = "First for Women";
    o.id_sets = restricted({10, 11}, 3);
    out.push_back(std::move(o));
  }
  {
    std::vector<std::string> t = {
        "The Oberoi Group is a hotel company with its head office in Delhi.",
        "Taj Hotels is headquartered in Mumbai.", "Natural History Society",
        "Taj Dubai", "The Oberoi family is an Indian family that is famous for "
                     "its involvement in hotels, namely through The Oberoi Group.",
        "Food and drink companies based in Boston",
        "City serves as headquarters of firms in Kolkata",
        "Bangalore, Taj Connemara", "Observer Research Foundation based in Delhi",
        "Companies based in Miami", "Survey of India, Kolkata"};
    OracleInstance o;
    o.inst = MakeInstance("oberoi",
                          "The Oberoi family is part of a hotel company that has a "
                          "head office in what city?",
                          {"Delhi"}, t, {0, 4});
    o.wrong_answer = "Mumbai";
    o.id_sets = restricted({0, 4}, 1);
    out.push_back(std::move(o));
  }
  {
    std::vector<std::string> t = {
        "Simpson episodes feature Harry Shearer as Mr. Burns",
        "Jon Lovitz as Artie Ziff",
        "Allison Beth \"Allie\" Goertz (born March 2, 1991) is an American musician.",
        "Krusty the Clown and Bart",
        "Her videos are posted on YouTube under the name Cossbysweater.",
        "Simpsons guest Jerry Nelson",
        "Goertz is known for her satirical songs based on various pop culture "
        "topics.",
        "Ralph Wiggum",
        "Milhouse Mussolini van Houten is a fictional character created by Matt "
        "Groening, who named the character after President Richard Nixon's "
        "middle name.",
        "Guitar parody", "by \"Weird Al\" Yankovic", "Beverly Hills 90210",
        "Baby bunnies", "Allegra's Window"};
    OracleInstance o;
    o.inst = MakeInstance("milhouse",
                          "Musician and satirist Allie Goertz wrote a song about the "
                          "\"The Simpsons\" character Milhouse, who Matt Groening "
                          "named after who?",
                          {"Richard Nixon"}, t, {2, 4, 6, 8});
    o.wrong_answer = "Harry Shearer";
    o.id_sets = restricted({2, 4, 6, 8}, 5);
    out.push_back(std::move(o));
  }
  return out;
}

// Replays whatever response was queued last.
class ScriptedJudge : public icrkit::judge::JudgeClient {
 public:
  std::string next;
  std::string Complete(const icrkit::judge::JudgeRequest&) override { return next; }
};

Outcome RewardOracle() {
  const auto start = std::chrono::steady_clock::now();
  ScriptedJudge judge;
  size_t pairs = 0;
  size_t table_pairs = 0;
  std::vector<std::string> mismatches;
  for (const auto& o : OracleInstances()) {
    const bool table_fixture = o.inst.documents.size() > 4;
    for (RewardKind kind : icrkit::rewards::kAllRewardKinds) {
      std::vector<OracleCase> cases;
      switch (kind) {
        case RewardKind::kAO: AddAnswerOnlyCases(o, cases); break;
        case RewardKind::kID: AddIdCases(o, cases); break;
        case RewardKind::kIDC: AddContentCases(o, cases); break;
        case RewardKind::kIDQ: AddQuoteCases(o, cases); break;
        case RewardKind::kRJudge: AddJudgeCases(o, cases); break;
      }
      for (const auto& c : cases) {
        judge.next = c.judge_response;
        const auto r = icrkit::rewards::ComputeReward(o.inst, c.output, kind, &judge);
        const auto j = icrkit::rewards::ToJson(r);
        bool same = r.total == c.expected_total;
        for (const auto& [key, want] : c.expected_components) {
          same &= j["components"].contains(key) && j["components"][key] == want;
        }
        ++pairs;
        table_pairs += table_fixture;
        if (!same && mismatches.size() < 5) {
          mismatches.push_back(o.inst.id + "/" +
                               std::string(icrkit::rewards::RewardKindName(kind)) +
                               " got " + j["components"].dump() + " want total " +
                               std::to_string(c.expected_total));
        } else if (!same) {
          mismatches.push_back("");
        }
      }
    }
  }
  const double secs = Seconds(start);
  std::string detail = std::to_string(pairs) + " pairs (" +
                       std::to_string(table_pairs) + " on the worked examples), " +
                       std::to_string(mismatches.size()) + " mismatches";
  for (const auto& m : mismatches) {
    if (!m.empty()) detail += "; " + m;
  }
  return {mismatches.empty() && pairs >= kMinOraclePairs && secs < kOracleBudgetS,
          detail};
}

// ---------------------------------------------------------------------------
// Parser round trip

const std::vector<std::string> kVocab = {
    "alpha", "bravo", "Delhi", "1844", "magazine", "women's", "river,", "(note)",
    "x-ray", "Z\xC3\xBCrich", "quiet", "family", "hotel", "paris;", "42%", "B.C."};

std::string RandomWords(std::mt19937_64& rng, size_t lo, size_t hi) {
  std::uniform_int_distribution<size_t> len(lo, hi);
  std::uniform_int_distribution<size_t> pick(0, kVocab.size() - 1);
  std::string s;
  for (size_t n = len(rng); n > 0; --n) s += (s.empty() ? "" : " ") + kVocab[pick(rng)];
  return s;
}

std::set<int> RandomIds(std::mt19937_64& rng, size_t lo, size_t hi) {
  std::uniform_int_distribution<size_t> len(lo, hi);
  std::uniform_int_distribution<int> id(0, 60);
  std::set<int> s;
  for (size_t n = len(rng); n > 0; --n) s.insert(id(rng));
  return s;
}

Outcome ParserRoundTrip() {
  namespace p = icrkit::parsing;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260101);
  size_t failures = 0;
  std::string first;
  auto expect = [&](bool ok, size_t trial, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) first = "trial " + std::to_string(trial) + ": " + what;
  };
  constexpr size_t kTrials = 1000;
  for (size_t t = 0; t < kTrials; ++t) {
    const std::string answer = RandomWords(rng, 1, 6);
    const std::set<int> ids = RandomIds(rng, 0, 5);
    std::map<int, std::string> contents;
    for (int id : RandomIds(rng, 1, 4)) {
      std::string body = RandomWords(rng, 1, 12);
      if (rng() % 3 == 0) body += "\n" + RandomWords(rng, 1, 8);
      contents[id] = body;
    }
    std::vector<std::string> quotes;
    for (size_t n = rng() % 5; n > 0; --n) quotes.push_back(RandomWords(rng, 1, 30));

    // ID template.
    const std::string id_out = TagList(ids) + "\nThe answer is: " + answer + ".";
    {
      p::Diagnostics d;
      expect(p::ExtractDocIds(id_out, &d) == ids && !d.flags.Has(p::FormatFlag::kMalformedIds),
             t, "id list");
      expect(p::ExtractAnswer(id_out) == answer + ".", t, "id-template answer");
    }
    // ID_C template.
    std::string c_out = "Relevant documents:\n";
    std::set<int> content_ids;
    for (const auto& [id, body] : contents) {
      c_out += "[DOC " + std::to_string(id) + "]\n" + body + "\n\n";
      content_ids.insert(id);
    }
    c_out += "The answer is: " + answer;
    expect(p::ExtractContents(c_out) == contents, t, "contents");
    expect(p::ExtractDocIds(c_out) == content_ids, t, "content ids");
    expect(p::ExtractAnswer(c_out) == answer, t, "content-template answer");
    // ID_Q template.
    std::string q_out;
    for (size_t q = 0; q < quotes.size(); ++q) {
      q_out += "   Quote " + std::to_string(q + 1) + ": \"" + quotes[q] + "\"\n";
    }
    q_out += "\n   Relevant Document IDs: " + TagList(ids) + "\n\n   The answer is: " + answer;
    {
      p::Diagnostics d;
      expect(p::ExtractQuotes(q_out, &d) == quotes, t, "quotes");
      expect(!d.flags.Has(p::FormatFlag::kOverlongQuote), t, "spurious overlong flag");
      expect(p::ExtractDocIds(q_out) == ids, t, "quote-template ids");
      expect(p::ExtractAnswer(q_out) == answer, t, "quote-template answer");
      const auto parsed = p::ParseOutput(q_out);
      expect(parsed.answer == answer && parsed.doc_ids == ids, t, "ParseOutput");
    }
    // Reasoning template citations.
    std::string r_out = "**Step 3: Reasoning**\n";
    for (int id : ids) r_out += "According to [DOC " + std::to_string(id) + "], yes.\n";
    r_out += "**Step 4: Answer**\nThe answer is: " + answer;
    expect(p::ExtractCitations(r_out) == ids, t, "citations");

    // Mutation: dropped marker.
    for (const std::string& y : {id_out, c_out, q_out}) {
      std::string m = y;
      const size_t at = m.rfind("The answer is: ");
      m.erase(at, std::string("The answer is: ").size());
      const auto parsed = p::ParseOutput(m);
      expect(parsed.flags.Has(p::FormatFlag::kNoAnswerMarker) && !parsed.answer,
             t, "dropped marker not flagged");
    }
    // Mutation: [DOC -1] mixed with real ids.
    {
      std::set<int> real = ids;
      if (real.empty()) real.insert(7);
      std::vector<std::string> tags;
      for (int i : real) tags.push_back("[DOC " + std::to_string(i) + "]");
      tags.insert(tags.begin() + static_cast<long>(rng() % (tags.size() + 1)), "[DOC -1]");
      std::string list;
      for (const auto& tag : tags) list += (list.empty() ? "" : ", ") + tag;
      for (const std::string& y :
           {list + "\nThe answer is: " + answer + ".",
            "Quote 1: \"x\"\nRelevant Document IDs: " + list + "\nThe answer is: " + answer}) {
        p::Diagnostics d;
        const auto got = p::ExtractDocIds(y, &d);
        const auto parsed = p::ParseOutput(y);
        expect(got.empty() && d.flags.Has(p::FormatFlag::kMalformedIds) &&
                   parsed.flags.Has(p::FormatFlag::kMalformedIds) &&
                   parsed.doc_ids && parsed.doc_ids->empty(),
               t, "mixed sentinel not flagged");
      }
    }
  }
  const double secs = Seconds(start);
  return {failures == 0 && secs < kParserBudgetS,
          std::to_string(kTrials) + " tuples, " + std::to_string(failures) +
              " failures" + (first.empty() ? "" : "; first: " + first)};
}

// ---------------------------------------------------------------------------
// NDCG brute force

double DefinitionalNdcg(const std::vector<int>& ranking, const std::set<int>& rel,
                        size_t k) {
  double dcg = 0.0;
  for (size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    if (rel.count(ranking[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double ideal = 0.0;
  for (size_t i = 0; i < std::min(k, rel.size()); ++i) {
    ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / ideal;
}

Outcome NdcgBruteForce() {
  const auto start = std::chrono::steady_clock::now();
  size_t rankings = 0, perfect = 0, mismatches = 0, imperfect_perfect = 0;
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n) {
    for (const auto& rel : AllSubsets(n)) {
      if (rel.empty() || rel.size() > 3) continue;
      std::vector<size_t> ks = {icrkit::evaluation::kDefaultNdcgK};
      if (n <= 6) {
        for (size_t k = 1; k <= static_cast<size_t>(n); ++k) ks.push_back(k);
      }
      std::vector<int> perm(static_cast<size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      do {
        bool is_perfect = true;
        for (size_t i = 0; i < rel.size(); ++i) is_perfect &= rel.count(perm[i]) > 0;
        for (size_t k : ks) {
          const double got = icrkit::evaluation::NdcgAtK(perm, rel, k);
          const double want = DefinitionalNdcg(perm, rel, k);
          const double diff = std::abs(got - want);
          worst = std::max(worst, diff);
          if (diff > kNdcgTol) ++mismatches;
          if (is_perfect) {
            ++perfect;
            if (got != 1.0) ++imperfect_perfect;
          }
          ++rankings;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  const double secs = Seconds(start);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%zu (ranking, k) pairs, %zu mismatches, max |diff| %.2e; "
                "%zu perfect rankings, %zu not exactly 1.0",
                rankings, mismatches, worst, perfect, imperfect_perfect);
  return {mismatches == 0 && imperfect_perfect == 0 && secs < kNdcgBudgetS, buf};
}

// ---------------------------------------------------------------------------
// Permutation invariance

struct AbstractOutput {
  std::string answer;
  bool marker = true;
  std::set<int> ids;
  bool mixed = false;
  std::map<int, std::string> contents;
  std::vector<std::pair<int, std::string>> quotes;  // source doc, quote
};

std::string Render(const AbstractOutput& a, RewardKind kind,
                   const std::function<int(int)>& map) {
  std::set<int> ids;
  for (int i : a.ids) ids.insert(map(i));
  std::string list = TagList(ids);
  if (a.mixed && !ids.empty()) list += ", [DOC -1]";
  const std::string answer = a.marker ? "The answer is: " + a.answer : a.answer;
  switch (kind) {
    case RewardKind::kAO: return "Short reasoning.\n" + answer;
    case RewardKind::kID: return list + "\n" + answer;
    case RewardKind::kIDC: {
      std::map<int, std::string> mapped;
      for (const auto& [i, body] : a.contents) mapped[map(i)] = body;
      std::string y = "Relevant documents:\n";
      for (const auto& [i, body] : mapped) {
        y += "[DOC " + std::to_string(i) + "]\n" + body + "\n\n";
      }
      return y + answer;
    }
    case RewardKind::kIDQ: {
      std::string y;
      for (size_t q = 0; q < a.quotes.size(); ++q) {
        y += "Quote " + std::to_string(q + 1) + ": \"" + a.quotes[q].second + "\"\n";
      }
      return y + "Relevant Document IDs: " + list + "\n" + answer;
    }
    case RewardKind::kRJudge: {
      std::string y;
      for (int i : ids) y += "According to [DOC " + std::to_string(i) + "], fine.\n";
      return y + answer;
    }
  }
  return answer;
}

Outcome PermutationInvariance() {
  std::mt19937_64 rng(777);
  icrkit::judge::RecordedJudge judge(
      std::map<std::string, std::string>{{"*", "\\boxed{Criterion 1: 1}\n\\boxed{Criterion 2: 0}\n\\boxed{Criterion 3: 1}"}});
  size_t checks = 0, violations = 0, nonzero = 0;
  std::string first;
  constexpr int kInstances = 500;
  for (int t = 0; t < kInstances; ++t) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<std::string> texts;
    for (int i = 0; i < n; ++i) texts.push_back(SyntheticDoc(t % 3 + i * 3) + " u" + std::to_string(t));
    std::set<int> gold;
    while (gold.empty()) {
      for (int i = 0; i < n; ++i) {
        if (rng() % 3 == 0) gold.insert(i);
      }
    }
    const auto inst = MakeInstance("p" + std::to_string(t), "Which value?",
                                   {"Blue Lagoon"}, texts, gold);

    AbstractOutput a;
    a.answer = rng() % 3 ? "the Blue Lagoon" : "Red Harbour";
    a.marker = rng() % 5 != 0;
    const bool exact = rng() % 2;
    a.ids = exact ? gold : std::set<int>{static_cast<int>(rng() % n)};
    a.mixed = rng() % 7 == 0;
    const auto content_ids = rng() % 2 ? gold : a.ids;
    for (int i : content_ids) {
      a.contents[i] = rng() % 4 ? texts[i] : Words(texts[i], 0, 10);
    }
    for (int i : a.ids) a.quotes.push_back({i, Words(texts[i], rng() % 10, 1 + rng() % 32)});

    const auto shuffled = icrkit::corpus::ShuffleInstance(inst, rng());
    std::map<std::string, int> new_index;
    for (const auto& d : shuffled.documents) new_index[d.text] = d.index;
    auto identity = [](int i) { return i; };
    auto remap = [&](int i) { return new_index.at(texts[i]); };

    for (RewardKind kind : icrkit::rewards::kAllRewardKinds) {
      const auto before = icrkit::rewards::ComputeReward(
          inst, Render(a, kind, identity), kind, &judge);
      const auto after = icrkit::rewards::ComputeReward(
          shuffled, Render(a, kind, remap), kind, &judge);
      const auto jb = icrkit::rewards::ToJson(before);
      const auto ja = icrkit::rewards::ToJson(after);
      ++checks;
      nonzero += before.total > 0;
      if (jb["total"] != ja["total"] || jb["components"] != ja["components"] ||
          jb["flags"] != ja["flags"]) {
        if (violations++ == 0) {
          first = inst.id + "/" + std::string(icrkit::rewards::RewardKindName(kind)) +
                  " " + jb["components"].dump() + " vs " + ja["components"].dump();
        }
      }
    }
  }
  return {violations == 0,
          std::to_string(kInstances) + " instances x 5 kinds = " +
              std::to_string(checks) + " checks (" + std::to_string(nonzero) +
              " with non-zero reward), " + std::to_string(violations) + " violations" +
              (first.empty() ? "" : "; first: " + first)};
}

// ---------------------------------------------------------------------------
// Retention nesting

Outcome RetentionNesting() {
  std::mt19937_64 rng(4242);
  constexpr int kTrials = 1000;
  size_t violations = 0, budgets = 0;
  for (int t = 0; t < kTrials; ++t) {
    icrkit::evaluation::AttentionRecord rec;
    rec.instance_id = "t" + std::to_string(t);
    const size_t n = 1 + rng() % 120;
    const bool coarse = rng() % 2;
    for (size_t i = 0; i < n; ++i) {
      rec.token_scores.push_back(coarse ? static_cast<double>(rng() % 4)
                                        : std::uniform_real_distribution<double>(0, 1)(rng));
    }
    size_t pos = rng() % 3;  // leading tokens outside any document
    int doc = 0;
    while (pos < n) {
      const size_t len = 1 + rng() % 20;
      const size_t end = std::min(n, pos + len);
      rec.doc_spans.push_back({doc++, pos, end});
      pos = end + rng() % 2;
    }
    rec.Validate();
    std::vector<bool> prev(n, false);
    std::map<int, double> prev_survival;
    for (size_t b = 0; b <= n; ++b) {
      const auto r = icrkit::evaluation::SimulateTopKRetention(rec, b);
      ++budgets;
      size_t kept = 0;
      for (size_t i = 0; i < n; ++i) {
        kept += r.retained[i];
        if (prev[i] && !r.retained[i]) ++violations;
      }
      if (kept != b) ++violations;
      for (const auto& [d, s] : r.survival) {
        const auto it = prev_survival.find(d);
        if (it != prev_survival.end() && s < it->second) ++violations;
      }
      prev = r.retained;
      prev_survival = r.survival;
    }
  }
  return {violations == 0, std::to_string(kTrials) + " records, " +
                               std::to_string(budgets) + " budgets, " +
                               std::to_string(violations) + " violations"};
}

// ---------------------------------------------------------------------------
// Pipeline determinism

size_t CountLines(const fs::path& p) {
  std::ifstream in(p);
  return static_cast<size_t>(
      std::count(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>(), '\n'));
}

Outcome PipelineDeterminism() {
  const fs::path root = fs::temp_directory_path() / "icrkit_acceptance_build";
  fs::remove_all(root);
  std::vector<std::string> runs;
  for (const char* name : {"run1", "run2"}) {
    const fs::path out = root / name;
    const std::string cmd = std::string("'") + ICRKIT_CLI_PATH + "' --seed 42 --output-dir '" +
                            out.string() + "' build-data --candidates '" +
                            (kData / "candidates_20.jsonl").string() + "' > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "build-data exited non-zero"};
    runs.push_back(out.string());
  }
  bool identical = true;
  for (const char* f : {"train.jsonl", "dev.jsonl"}) {
    identical &= icrkit::jsonl::ReadFile(fs::path(runs[0]) / f) ==
                 icrkit::jsonl::ReadFile(fs::path(runs[1]) / f);
  }
  const size_t train = CountLines(fs::path(runs[0]) / "train.jsonl");
  const size_t dev = CountLines(fs::path(runs[0]) / "dev.jsonl");
  const size_t want_train = static_cast<size_t>(std::llround(0.95 * 20));
  fs::remove_all(root);
  return {identical && train == want_train && dev == 20 - want_train,
          std::string(identical ? "byte-identical" : "outputs differ") +
              ", split " + std::to_string(train) + "/" + std::to_string(dev) +
              " (want " + std::to_string(want_train) + "/" +
              std::to_string(20 - want_train) + ")"};
}

// ---------------------------------------------------------------------------
// Refinement

Outcome Refinement() {
  const fs::path root = fs::temp_directory_path() / "icrkit_acceptance_refine";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::string> subjects = {"harbor", "meadow", "canyon", "glacier",
                                             "orchard", "lagoon", "prairie", "tundra"};
  std::vector<json> rows;
  constexpr int kInstances = 40;
  for (int i = 0; i < kInstances; ++i) {
    const std::string s = subjects[i % subjects.size()];
    const std::string g1 = "The " + s + " station records rainfall every morning near the old bridge";
    const std::string g2 = "Visitors to the " + s + " often follow the northern trail past the lighthouse";
    // One changed word each: similar enough to promote.
    const std::string n1 = "The " + s + " station records rainfall every evening near the old bridge";
    const std::string n2 = "Visitors to the " + s + " often follow the southern trail past the lighthouse";
    // Digit-only passages share no characters or tokens with the golds.
    std::vector<std::string> retrieved = {n1, "9081 7263 5544", n2,
                                          std::to_string(1000 + i) + " 3141 2718"};
    rows.push_back({{"id", "r" + std::to_string(i)},
                    {"question", "What does the " + s + " station record?"},
                    {"answers", {"rainfall"}},
                    {"gold_docs", {g1, g2}},
                    {"retrieved", retrieved}});
  }
  icrkit::jsonl::Write(root / "candidates.jsonl", rows);

  icrkit::pipeline::BuildDataOptions opts;
  opts.candidates = root / "candidates.jsonl";
  opts.output_dir = root / "out";
  opts.build.shuffle_seed = 42;
  const auto judge = icrkit::judge::RecordedJudge::FromFile(kData / "judge_approve_all.jsonl");
  const auto result = icrkit::pipeline::BuildData(opts, judge.get());

  size_t instances = 0, golds = 0;
  for (const char* f : {"train.jsonl", "dev.jsonl"}) {
    icrkit::jsonl::ForEach(opts.output_dir / f, [&](const json& j, size_t) {
      const auto inst = icrkit::corpus::InstanceFromJson(j);
      ++instances;
      golds += inst.gold_ids.size();
    });
  }
  fs::remove_all(root);
  const auto& promo = result.report.at("promotion");
  const double mean = instances ? static_cast<double>(golds) / static_cast<double>(instances) : 0.0;
  return {instances == kInstances && mean == 4.0,
          std::to_string(instances) + " instances, mean |gold_ids| " + Fixed(mean, 4) +
              " (before " + Fixed(promo.at("mean_gold_before").get<double>(), 4) +
              ", judge accepted " + std::to_string(promo.at("judge_accepted").get<size_t>()) +
              ")"};
}

// ---------------------------------------------------------------------------
// Rouge-L

Outcome RougeSpots() {
  using icrkit::evaluation::RougeL;
  const double a = RougeL("the cat sat", "the cat");
  const double b = RougeL("the cat sat on the mat", "the cat sat on the mat");
  const double c = RougeL("alpha beta gamma", "delta epsilon");
  const double want = 2.0 * (2.0 / 3.0) * 1.0 / (2.0 / 3.0 + 1.0);
  return {a == want && b == 1.0 && c == 0.0,
          "(\"the cat sat\", \"the cat\")=" + Fixed(a, 6) + " identical=" + Fixed(b, 6) +
              " disjoint=" + Fixed(c, 6)};
}

}  // namespace

int main() {
  Run("correlation", Correlation);
  Run("drop_table", DropTable);
  Run("reward_oracle", RewardOracle);
  Run("parser_round_trip", ParserRoundTrip);
  Run("ndcg_brute_force", NdcgBruteForce);
  Run("permutation_invariance", PermutationInvariance);
  Run("retention_nesting", RetentionNesting);
  Run("pipeline_determinism", PipelineDeterminism);
  Run("refinement", Refinement);
  Run("rouge_l_spot_values", RougeSpots);
  std::cout << (g_failures == 0 ? "all criteria passed"
                                : std::to_string(g_failures) + " criterion(s) failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
