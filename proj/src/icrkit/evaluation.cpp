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

#include "icrkit/evaluation.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "icrkit/error.hpp"
#include "icrkit/matching.hpp"
#include "icrkit/text.hpp"

namespace icrkit::evaluation {

namespace {

// Letter at the start of s: "B", "(B)", "B.", "B)" - followed by a non-letter.
char LeadingChoiceLetter(std::string_view s) {
  s = text::Trim(s);
  while (!s.empty() && (s.front() == '*' || s.front() == ':')) {
    s = text::Trim(s.substr(1));
  }
  size_t i = 0;
  const bool paren = !s.empty() && (s[0] == '(' || s[0] == '[');
  if (paren) ++i;
  if (i >= s.size()) return 0;
  const char c = s[i];
  if (c < 'A' || c > 'D') return 0;
  ++i;
  if (i < s.size() && std::isalnum(static_cast<unsigned char>(s[i]))) return 0;
  if (i < s.size() && s[i] == '\'') return 0;  // "A's"
  return c;
}

char UniqueChoiceMatch(std::string_view s, const std::vector<std::string>& choices) {
  const std::string norm = matching::Normalize(s);
  char found = 0;
  for (size_t i = 0; i < choices.size() && i < 4; ++i) {
    const std::string c = matching::Normalize(choices[i]);
    if (c.empty() || norm.find(c) == std::string::npos) continue;
    if (found != 0) return 0;
    found = static_cast<char>('A' + i);
  }
  return found;
}

}  // namespace

int SubemScore(std::string_view prediction,
               const std::vector<std::string>& answers) {
  if (answers.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "answers must be non-empty");
  }
  for (const auto& a : answers) {
    if (matching::Normalize(a).empty()) continue;
    if (matching::SubExactMatch(prediction, a)) return 1;
  }
  return 0;
}

McResult McAccuracy(std::string_view prediction,
                    const std::vector<std::string>& choices, char gold_letter) {
  if (gold_letter < 'A' || gold_letter > 'D') {
    throw Error(ErrorCode::kInvalidArgument, "gold letter must be A..D");
  }
  McResult out;
  std::string_view tail;
  bool marker = false;
  for (const std::string_view m : {"The correct answer is", "The answer is"}) {
    const size_t pos = text::RFindNoCase(prediction, m);
    if (pos != std::string_view::npos) {
      tail = prediction.substr(pos + m.size());
      marker = true;
      break;
    }
  }
  char letter = 0;
  if (marker) {
    const size_t nl = tail.find('\n');
    const std::string_view line = tail.substr(0, nl);
    letter = LeadingChoiceLetter(line);
    if (letter == 0) letter = UniqueChoiceMatch(line, choices);
  }
  if (letter == 0) {
    const auto lines = text::SplitLines(text::Trim(prediction));
    if (!lines.empty()) letter = LeadingChoiceLetter(lines.front());
  }
  if (letter == 0) letter = UniqueChoiceMatch(prediction, choices);
  out.extracted = letter != 0;
  out.letter = letter;
  out.correct = letter == gold_letter ? 1 : 0;
  return out;
}

double RougeL(std::string_view prediction, std::string_view reference) {
  const auto p = matching::NormalizedTokens(prediction);
  const auto r = matching::NormalizedTokens(reference);
  if (p.empty() && r.empty()) return 1.0;
  if (p.empty() || r.empty()) return 0.0;
  std::vector<size_t> prev(r.size() + 1, 0), cur(r.size() + 1, 0);
  for (size_t i = 1; i <= p.size(); ++i) {
    for (size_t j = 1; j <= r.size(); ++j) {
      cur[j] = p[i - 1] == r[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[r.size()]);
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / p.size();
  const double recall = lcs / r.size();
  return 2.0 * precision * recall / (precision + recall);
}

void AttentionRecord::Validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kValidation,
                "attention record '" + instance_id + "': " + why);
  };
  for (double s : token_scores) {
    if (!std::isfinite(s) || s < 0.0) fail("token scores must be finite and >= 0");
  }
  std::vector<TokenSpan> sorted = doc_spans;
  std::sort(sorted.begin(), sorted.end(),
            [](const TokenSpan& a, const TokenSpan& b) { return a.begin < b.begin; });
  std::set<int> docs;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (s.begin > s.end || s.end > token_scores.size()) fail("span out of range");
    if (i > 0 && s.begin < sorted[i - 1].end) fail("spans overlap");
    if (!docs.insert(s.doc).second) fail("duplicate doc span");
  }
}

AttentionRecord AttentionFromJson(const nlohmann::json& j) {
  AttentionRecord rec;
  try {
    rec.instance_id = j.at("id").get<std::string>();
    for (const auto& s : j.at("doc_spans")) {
      if (!s.is_array() || s.size() != 3) {
        throw Error(ErrorCode::kValidation, "doc_spans entries are [doc, start, end]");
      }
      const auto b = s[1].get<long long>();
      const auto e = s[2].get<long long>();
      if (b < 0 || e < 0) throw Error(ErrorCode::kValidation, "negative span bound");
      rec.doc_spans.push_back({s[0].get<int>(), static_cast<size_t>(b),
                               static_cast<size_t>(e)});
    }
    rec.token_scores = j.at("token_scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("bad attention row: ") + e.what());
  }
  rec.Validate();
  return rec;
}

std::vector<std::pair<int, double>> DocAttentionScores(const AttentionRecord& rec,
                                                       AttentionAggregation agg) {
  std::vector<std::pair<int, double>> out;
  out.reserve(rec.doc_spans.size());
  for (const auto& span : rec.doc_spans) {
    double sum = 0.0;
    for (size_t t = span.begin; t < span.end; ++t) sum += rec.token_scores[t];
    if (agg == AttentionAggregation::kMean) {
      const size_t len = span.end - span.begin;
      sum = len == 0 ? 0.0 : sum / static_cast<double>(len);
    }
    out.emplace_back(span.doc, sum);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

double NdcgAtK(std::span<const int> ranking, const std::set<int>& relevant,
               size_t k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (relevant.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "relevant set must be non-empty");
  }
  std::set<int> seen;
  for (int d : ranking) {
    if (!seen.insert(d).second) {
      throw Error(ErrorCode::kInvalidArgument, "ranking contains duplicates");
    }
  }
  double dcg = 0.0;
  const size_t depth = std::min(k, ranking.size());
  for (size_t r = 0; r < depth; ++r) {
    if (relevant.count(ranking[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  double ideal = 0.0;
  const size_t ideal_depth = std::min(k, relevant.size());
  for (size_t r = 0; r < ideal_depth; ++r) {
    ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / ideal;
}

Retention SimulateTopKRetention(const AttentionRecord& rec, size_t budget) {
  const size_t n = rec.token_scores.size();
  if (budget > n) {
    throw Error(ErrorCode::kInvalidArgument, "budget exceeds token count");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return rec.token_scores[a] > rec.token_scores[b];
  });
  Retention out;
  out.retained.assign(n, false);
  for (size_t i = 0; i < budget; ++i) out.retained[order[i]] = true;
  for (const auto& span : rec.doc_spans) {
    const size_t len = span.end - span.begin;
    size_t kept = 0;
    for (size_t t = span.begin; t < span.end; ++t) kept += out.retained[t];
    out.survival[span.doc] = len == 0 ? 0.0 : static_cast<double>(kept) / len;
  }
  return out;
}

bool MetricTable::Has(const std::string& row, const std::string& col) const {
  const auto it = values.find(row);
  return it != values.end() && it->second.count(col) > 0;
}

double MetricTable::At(const std::string& row, const std::string& col) const {
  if (!Has(row, col)) {
    throw Error(ErrorCode::kNotFound, "no value for (" + row + ", " + col + ")");
  }
  return values.at(row).at(col);
}

void MetricTable::Set(const std::string& row, const std::string& col, double v) {
  if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
  if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
    columns.push_back(col);
  }
  values[row][col] = v;
}

MetricTable ReadMetricTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  MetricTable table;
  std::vector<std::string> header;
  std::string line;
  size_t number = 0;
  auto split_tabs = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, '\t')) out.emplace_back(text::Trim(cell));
    return out;
  };
  while (std::getline(in, line)) {
    ++number;
    if (text::Trim(line).empty() || text::Trim(line).front() == '#') continue;
    auto cells = split_tabs(line);
    if (header.empty()) {
      if (cells.size() < 2) {
        throw Error(ErrorCode::kParse, path.string() + ": header needs >= 2 columns");
      }
      header = std::move(cells);
      table.row_header = header[0];
      continue;
    }
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParse, path.string() + " line " +
                                         std::to_string(number) +
                                         ": wrong number of cells");
    }
    for (size_t c = 1; c < cells.size(); ++c) {
      if (cells[c] == "NA" || cells[c].empty()) continue;
      double v = 0.0;
      const auto* b = cells[c].data();
      const auto res = std::from_chars(b, b + cells[c].size(), v);
      if (res.ec != std::errc() || res.ptr != b + cells[c].size()) {
        throw Error(ErrorCode::kParse, path.string() + " line " +
                                           std::to_string(number) +
                                           ": bad number '" + cells[c] + "'");
      }
      table.Set(cells[0], header[c], v);
    }
  }
  if (header.empty()) throw Error(ErrorCode::kParse, path.string() + ": empty table");
  return table;
}

std::string MetricTableToTsv(const MetricTable& t, int decimals) {
  std::ostringstream out;
  out << t.row_header;
  for (const auto& c : t.columns) out << '\t' << c;
  out << '\n';
  out.setf(std::ios::fixed);
  out.precision(decimals);
  for (const auto& r : t.rows) {
    out << r;
    for (const auto& c : t.columns) {
      out << '\t';
      if (t.Has(r, c)) {
        out << RoundTo(t.At(r, c), decimals);
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
  return out.str();
}

double DropPercent(double full, double compressed) {
  if (!(full > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "full-context value must be > 0");
  }
  return (compressed - full) / full * 100.0;
}

double RoundTo(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

DropTable ComputeDropTable(const MetricTable& full, const MetricTable& compressed) {
  DropTable out;
  out.drops.row_header = full.row_header;
  for (const auto& row : full.rows) {
    std::vector<double> row_drops;
    for (const auto& col : full.columns) {
      if (!full.Has(row, col) || !compressed.Has(row, col)) continue;
      const double d = DropPercent(full.At(row, col), compressed.At(row, col));
      out.drops.Set(row, col, d);
      row_drops.push_back(d);
    }
    if (!row_drops.empty()) {
      out.average[row] = std::accumulate(row_drops.begin(), row_drops.end(), 0.0) /
                         static_cast<double>(row_drops.size());
    }
  }
  return out;
}

PearsonResult Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "pearson inputs differ in length");
  }
  const size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::kInvalidArgument, "pearson needs n >= 3");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "pearson undefined for zero variance");
  }
  PearsonResult out;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(out.r) >= 1.0) {
    out.p = 0.0;
    return out;
  }
  const double dof = static_cast<double>(n - 2);
  const double t = out.r * std::sqrt(dof) / std::sqrt(1.0 - out.r * out.r);
  const boost::math::students_t dist(dof);
  out.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return out;
}

long long ParseContextLength(std::string_view label) {
  label = text::Trim(label);
  if (label.empty()) return -1;
  long long mult = 1;
  const char last = label.back();
  if (last == 'k' || last == 'K') {
    mult = 1024;
    label.remove_suffix(1);
  } else if (last == 'm' || last == 'M') {
    mult = 1024 * 1024;
    label.remove_suffix(1);
  }
  long long v = 0;
  const auto res = std::from_chars(label.data(), label.data() + label.size(), v);
  if (res.ec != std::errc() || res.ptr != label.data() + label.size() || v < 0) {
    return -1;
  }
  return v * mult;
}

Aggregate AggregateByGroup(const std::map<std::string, std::vector<double>>& groups) {
  if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "no groups");
  Aggregate out;
  bool numeric = true;
  for (const auto& [label, values] : groups) {
    if (values.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "group '" + label + "' is empty");
    }
    if (ParseContextLength(label) < 0) numeric = false;
    out.groups.push_back({label,
                          std::accumulate(values.begin(), values.end(), 0.0) /
                              static_cast<double>(values.size()),
                          values.size()});
  }
  if (numeric) {
    std::stable_sort(out.groups.begin(), out.groups.end(),
                     [](const GroupMean& a, const GroupMean& b) {
                       return ParseContextLength(a.label) < ParseContextLength(b.label);
                     });
  }
  double sum = 0.0;
  for (const auto& g : out.groups) sum += g.mean;
  out.average = sum / static_cast<double>(out.groups.size());
  return out;
}

}  // namespace icrkit::evaluation
