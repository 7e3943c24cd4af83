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

#include "icrkit/eval_run.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "icrkit/error.hpp"
#include "icrkit/jsonl.hpp"
#include "icrkit/log.hpp"
#include "icrkit/parallel.hpp"

namespace icrkit::eval_run {

using nlohmann::json;

namespace {

[[noreturn]] void MissingInput(const std::string& metric, const std::string& what) {
  throw Error(ErrorCode::kConfig, "metric '" + metric + "' needs " + what);
}

std::string FormatNumber(double v) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << v;
  return out.str();
}

struct InstanceScores {
  std::string id;
  std::string group;
  std::map<std::string, double> values;
  std::vector<std::string> flags;
};

}  // namespace

EvalInstance EvalInstanceFromJson(const json& j) {
  EvalInstance e;
  e.instance = corpus::InstanceFromJson(j);
  try {
    if (j.contains("group")) e.group = j.at("group").get<std::string>();
    if (j.contains("choices")) e.choices = j.at("choices").get<std::vector<std::string>>();
    if (j.contains("gold_letter")) {
      const auto g = j.at("gold_letter").get<std::string>();
      if (g.size() != 1 || g[0] < 'A' || g[0] > 'D') {
        throw Error(ErrorCode::kValidation, "gold_letter must be one of A..D");
      }
      e.gold_letter = g[0];
    }
    if (j.contains("reference")) e.reference = j.at("reference").get<std::string>();
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kValidation, std::string("bad eval fields: ") + ex.what());
  }
  if (e.group.empty()) throw Error(ErrorCode::kValidation, "group must be non-empty");
  return e;
}

std::vector<EvalInstance> LoadEvalInstances(const std::filesystem::path& path) {
  std::vector<EvalInstance> out;
  std::set<std::string> ids;
  const auto errors = jsonl::ForEach(path, [&](const json& j, size_t) {
    auto e = EvalInstanceFromJson(j);
    if (!ids.insert(e.instance.id).second) {
      throw Error(ErrorCode::kValidation, "duplicate instance id '" + e.instance.id + "'");
    }
    out.push_back(std::move(e));
  });
  if (!errors.empty()) {
    throw Error(ErrorCode::kValidation, path.string() + ":" +
                                            std::to_string(errors.front().line) + ": " +
                                            errors.front().message);
  }
  return out;
}

json RunEval(const EvalOptions& opts) {
  if (opts.instances.empty() || !std::filesystem::exists(opts.instances)) {
    throw Error(ErrorCode::kConfig, "instance file not found: " + opts.instances.string());
  }
  const auto instances = LoadEvalInstances(opts.instances);
  if (instances.empty()) throw Error(ErrorCode::kValidation, "no instances to evaluate");

  const bool have_predictions = !opts.predictions.empty();
  const bool have_attention = !opts.attention.empty();
  const bool any_mc = std::any_of(instances.begin(), instances.end(), [](const auto& e) {
    return e.gold_letter.has_value();
  });
  const bool any_ref = std::any_of(instances.begin(), instances.end(), [](const auto& e) {
    return e.reference.has_value();
  });

  std::vector<std::string> metrics = opts.metrics;
  if (metrics.empty()) {
    if (have_predictions) {
      metrics.push_back(kMetricSubem);
      if (any_mc) metrics.push_back(kMetricMc);
      if (any_ref) metrics.push_back(kMetricRouge);
    }
    if (have_attention) {
      metrics.push_back(kMetricNdcg);
      metrics.push_back(kMetricRetention);
    }
    if (metrics.empty()) {
      throw Error(ErrorCode::kConfig, "nothing to evaluate: give predictions or an attention dump");
    }
  }
  std::set<std::string> wanted(metrics.begin(), metrics.end());
  for (const auto& m : wanted) {
    if (m == kMetricSubem || m == kMetricMc || m == kMetricRouge) {
      if (!have_predictions) MissingInput(m, "a prediction file");
      if (m == kMetricMc && !any_mc) MissingInput(m, "instances with choices and gold_letter");
      if (m == kMetricRouge && !any_ref) MissingInput(m, "instances with a reference");
    } else if (m == kMetricNdcg || m == kMetricRetention) {
      if (!have_attention) MissingInput(m, "an attention dump");
    } else {
      throw Error(ErrorCode::kConfig, "unknown metric '" + m + "'");
    }
  }
  if (wanted.count(kMetricRetention) &&
      !(opts.retention_fraction >= 0.0 && opts.retention_fraction <= 1.0)) {
    throw Error(ErrorCode::kConfig, "retention fraction must be in [0, 1]");
  }
  if (wanted.count(kMetricNdcg) && opts.ndcg_k == 0) {
    throw Error(ErrorCode::kConfig, "ndcg k must be >= 1");
  }

  std::map<std::string, size_t> index;
  for (size_t i = 0; i < instances.size(); ++i) index[instances[i].instance.id] = i;

  std::map<std::string, std::string> predictions;
  std::vector<std::string> unknown_predictions;
  if (have_predictions) {
    const auto errors = jsonl::ForEach(opts.predictions, [&](const json& j, size_t) {
      const auto id = j.at("id").get<std::string>();
      const auto output = j.at("output").get<std::string>();
      if (!index.count(id)) {
        unknown_predictions.push_back(id);
        return;
      }
      if (!predictions.emplace(id, output).second) {
        throw Error(ErrorCode::kValidation, "duplicate prediction for '" + id + "'");
      }
    });
    if (!errors.empty()) {
      throw Error(ErrorCode::kValidation, opts.predictions.string() + ":" +
                                              std::to_string(errors.front().line) + ": " +
                                              errors.front().message);
    }
    for (const auto& id : unknown_predictions) {
      log::Warning("prediction for unknown instance '" + id + "' ignored");
    }
  }

  std::map<std::string, evaluation::AttentionRecord> attention;
  if (have_attention) {
    const auto errors = jsonl::ForEach(opts.attention, [&](const json& j, size_t) {
      auto rec = evaluation::AttentionFromJson(j);
      const auto it = index.find(rec.instance_id);
      if (it == index.end()) {
        throw Error(ErrorCode::kValidation,
                    "attention row for unknown instance '" + rec.instance_id + "'");
      }
      const auto& inst = instances[it->second].instance;
      for (const auto& s : rec.doc_spans) {
        if (s.doc < 0 || static_cast<size_t>(s.doc) >= inst.documents.size()) {
          throw Error(ErrorCode::kValidation, "attention span for unknown doc " +
                                                  std::to_string(s.doc) + " in '" +
                                                  rec.instance_id + "'");
        }
      }
      const std::string id = rec.instance_id;
      if (!attention.emplace(id, std::move(rec)).second) {
        throw Error(ErrorCode::kValidation, "duplicate attention row for '" + id + "'");
      }
    });
    if (!errors.empty()) {
      throw Error(ErrorCode::kValidation, opts.attention.string() + ":" +
                                              std::to_string(errors.front().line) + ": " +
                                              errors.front().message);
    }
  }

  std::vector<InstanceScores> scores(instances.size());
  ParallelFor(instances.size(), opts.workers, [&](size_t i) {
    const auto& e = instances[i];
    auto& s = scores[i];
    s.id = e.instance.id;
    s.group = e.group;
    std::string output;
    if (have_predictions) {
      const auto it = predictions.find(s.id);
      if (it == predictions.end()) {
        s.flags.push_back("missing_prediction");
      } else {
        output = it->second;
      }
    }
    if (wanted.count(kMetricSubem)) {
      s.values[kMetricSubem] = evaluation::SubemScore(output, e.instance.answers);
    }
    if (wanted.count(kMetricMc) && e.gold_letter) {
      const auto mc = evaluation::McAccuracy(output, e.choices, *e.gold_letter);
      s.values[kMetricMc] = mc.correct;
      if (!mc.extracted) s.flags.push_back("mc_no_choice");
    }
    if (wanted.count(kMetricRouge) && e.reference) {
      s.values[kMetricRouge] = evaluation::RougeL(output, *e.reference);
    }
    const auto att = attention.find(s.id);
    if (att == attention.end()) {
      if (wanted.count(kMetricNdcg) || wanted.count(kMetricRetention)) {
        s.flags.push_back("missing_attention");
      }
      return;
    }
    const auto& rec = att->second;
    if (wanted.count(kMetricNdcg) && !e.instance.gold_ids.empty()) {
      const auto ranked = evaluation::DocAttentionScores(rec, opts.aggregation);
      std::vector<int> ranking;
      for (const auto& [doc, score] : ranked) ranking.push_back(doc);
      s.values[kMetricNdcg] = evaluation::NdcgAtK(ranking, e.instance.gold_ids, opts.ndcg_k);
    }
    if (wanted.count(kMetricRetention)) {
      const auto budget = static_cast<size_t>(
          std::llround(opts.retention_fraction * static_cast<double>(rec.token_scores.size())));
      const auto kept = evaluation::SimulateTopKRetention(rec, budget);
      double gold = 0.0, other = 0.0;
      size_t n_gold = 0, n_other = 0;
      for (const auto& [doc, frac] : kept.survival) {
        if (e.instance.gold_ids.count(doc)) {
          gold += frac;
          ++n_gold;
        } else {
          other += frac;
          ++n_other;
        }
      }
      if (n_gold > 0) s.values["gold_survival"] = gold / n_gold;
      if (n_other > 0) s.values["other_survival"] = other / n_other;
    }
  });
  std::sort(scores.begin(), scores.end(),
            [](const InstanceScores& a, const InstanceScores& b) { return a.id < b.id; });

  std::vector<std::string> columns;
  for (const auto& m : metrics) {
    if (m == kMetricRetention) {
      columns.push_back("gold_survival");
      columns.push_back("other_survival");
    } else {
      columns.push_back(m);
    }
  }

  json per_instance = json::array();
  std::string per_tsv = "id\tgroup";
  for (const auto& c : columns) per_tsv += "\t" + c;
  per_tsv += "\tflags\n";
  std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
  for (const auto& s : scores) {
    json row = {{"id", s.id}, {"group", s.group}, {"flags", s.flags}};
    per_tsv += s.id + "\t" + s.group;
    for (const auto& c : columns) {
      const auto it = s.values.find(c);
      if (it == s.values.end()) {
        per_tsv += "\tNA";
        continue;
      }
      row[c] = it->second;
      per_tsv += "\t" + FormatNumber(it->second);
      grouped[c][s.group].push_back(it->second);
    }
    std::string flags;
    for (const auto& f : s.flags) flags += (flags.empty() ? "" : ",") + f;
    per_tsv += "\t" + flags + "\n";
    per_instance.push_back(std::move(row));
  }

  json aggregates = json::object();
  evaluation::MetricTable agg_table;
  agg_table.row_header = "metric";
  for (const auto& c : columns) {
    const auto it = grouped.find(c);
    if (it == grouped.end()) continue;
    const auto agg = evaluation::AggregateByGroup(it->second);
    json groups = json::array();
    for (const auto& g : agg.groups) {
      groups.push_back({{"group", g.label}, {"mean", g.mean}, {"count", g.count}});
      agg_table.Set(c, g.label, g.mean);
    }
    agg_table.Set(c, "Avg", agg.average);
    aggregates[c] = {{"groups", groups}, {"average", agg.average}};
  }

  json report = {{"run_id", opts.run_id},
                 {"instances", instances.size()},
                 {"metrics", metrics},
                 {"per_instance", per_instance},
                 {"aggregates", aggregates},
                 {"unknown_predictions", unknown_predictions}};
  if (wanted.count(kMetricNdcg)) report["ndcg_k"] = opts.ndcg_k;
  if (wanted.count(kMetricRetention)) report["retention_fraction"] = opts.retention_fraction;

  if (!opts.output_dir.empty()) {
    jsonl::WriteFile(opts.output_dir / "report.json", report.dump(2) + "\n");
    jsonl::WriteFile(opts.output_dir / "per_instance.tsv", per_tsv);
    jsonl::WriteFile(opts.output_dir / "aggregates.tsv",
                     evaluation::MetricTableToTsv(agg_table, 4));
    if (wanted.count(kMetricNdcg)) {
      std::string ndcg = "id\tgroup\tndcg@" + std::to_string(opts.ndcg_k) + "\n";
      for (const auto& s : scores) {
        const auto it = s.values.find(kMetricNdcg);
        if (it != s.values.end()) {
          ndcg += s.id + "\t" + s.group + "\t" + FormatNumber(it->second) + "\n";
        }
      }
      jsonl::WriteFile(opts.output_dir / "ndcg.tsv", ndcg);
    }
  }
  return report;
}

json RunReport(const ReportOptions& opts) {
  const bool drop = !opts.full.empty() || !opts.compressed.empty();
  const bool corr = !opts.corr_x.empty() || !opts.corr_y.empty();
  if (!drop && !corr) {
    throw Error(ErrorCode::kConfig, "report needs --full/--compressed or --corr-x/--corr-y");
  }
  json report = json::object();

  if (drop) {
    if (opts.full.empty() || opts.compressed.empty()) {
      throw Error(ErrorCode::kConfig, "drop analysis needs both --full and --compressed");
    }
    auto full = evaluation::ReadMetricTable(opts.full);
    auto compressed = evaluation::ReadMetricTable(opts.compressed);
    for (const auto& col : opts.exclude_columns) {
      std::erase(full.columns, col);
      for (auto& [row, values] : full.values) values.erase(col);
    }
    const auto table = evaluation::ComputeDropTable(full, compressed);
    evaluation::MetricTable printable = table.drops;
    json rows = json::array();
    for (const auto& row : table.drops.rows) {
      json cells = json::object();
      for (const auto& col : table.drops.columns) {
        if (table.drops.Has(row, col)) {
          cells[col] = {{"raw", table.drops.At(row, col)},
                        {"rounded", evaluation::RoundTo(table.drops.At(row, col), opts.decimals)}};
        }
      }
      const double avg = table.average.at(row);
      printable.Set(row, "Avg", avg);
      rows.push_back({{"row", row},
                      {"drops", cells},
                      {"average", avg},
                      {"average_rounded", evaluation::RoundTo(avg, opts.decimals)}});
    }
    report["drop_table"] = {{"rows", rows}, {"excluded_columns", opts.exclude_columns}};
    if (!opts.output_dir.empty()) {
      jsonl::WriteFile(opts.output_dir / "drop_table.tsv",
                       evaluation::MetricTableToTsv(printable, opts.decimals));
    }
  }

  if (corr) {
    if (opts.corr_x.empty() || opts.corr_y.empty()) {
      throw Error(ErrorCode::kConfig, "correlation needs both --corr-x and --corr-y");
    }
    const auto xt = evaluation::ReadMetricTable(opts.corr_x);
    const auto yt = evaluation::ReadMetricTable(opts.corr_y);
    std::vector<double> x, y;
    std::vector<std::string> labels;
    for (const auto& row : xt.rows) {
      if (xt.Has(row, opts.corr_x_column) && yt.Has(row, opts.corr_y_column)) {
        labels.push_back(row);
        x.push_back(xt.At(row, opts.corr_x_column));
        y.push_back(yt.At(row, opts.corr_y_column));
      }
    }
    const auto r = evaluation::Pearson(x, y);
    report["correlation"] = {{"rows", labels},
                             {"x", x},
                             {"y", y},
                             {"n", x.size()},
                             {"r", r.r},
                             {"p", r.p}};
    if (!opts.output_dir.empty()) {
      std::string tsv = "x\ty\tn\tr\tp\n";
      tsv += opts.corr_x.filename().string() + ":" + opts.corr_x_column + "\t" +
             opts.corr_y.filename().string() + ":" + opts.corr_y_column + "\t" +
             std::to_string(x.size()) + "\t" + FormatNumber(r.r) + "\t" +
             FormatNumber(r.p) + "\n";
      jsonl::WriteFile(opts.output_dir / "correlation.tsv", tsv);
    }
  }

  if (!opts.output_dir.empty()) {
    jsonl::WriteFile(opts.output_dir / "report.json", report.dump(2) + "\n");
  }
  return report;
}

}  // namespace icrkit::eval_run
