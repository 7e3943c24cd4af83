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

// icrkit command-line front end. All work goes through the C API.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icrkit/icrkit.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

int ExitCodeFor(icr_status st) {
  switch (st) {
    case ICR_OK: return kExitOk;
    case ICR_TRANSPORT:
    case ICR_INTERNAL: return kExitPartial;
    default: return kExitConfig;
  }
}

int Fail(icr_status st) {
  std::cerr << "icrkit: " << icr_status_string(st) << ": " << icr_last_error() << '\n';
  return ExitCodeFor(st);
}

// Owns a string returned by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { icr_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Globals {
  std::string config;
  std::optional<unsigned long long> seed;
  std::optional<size_t> workers;
  std::string output_dir;
  std::string judge_mode;
  std::string judge_fixture;
  std::vector<std::string> instances;
};

json Overrides(const Globals& g) {
  json o = json::object();
  if (g.seed) o["seed"] = *g.seed;
  if (g.workers) o["workers"] = *g.workers;
  if (!g.output_dir.empty()) o["output_dir"] = g.output_dir;
  if (!g.instances.empty()) o["corpus"] = g.instances;
  if (!g.judge_mode.empty()) o["judge"]["mode"] = g.judge_mode;
  if (!g.judge_fixture.empty()) o["judge"]["fixture"] = g.judge_fixture;
  return o;
}

struct Engine {
  icr_engine* e = nullptr;
  ~Engine() { icr_engine_destroy(e); }
};

icr_status OpenEngine(const Globals& g, const json& extra, Engine& engine) {
  json o = Overrides(g);
  o.merge_patch(extra);
  return icr_engine_create(g.config.empty() ? nullptr : g.config.c_str(), 1,
                           o.dump().c_str(), &engine.e);
}

int ServeTcp(icr_engine* engine, const std::string& host, uint16_t port,
             const char* kind) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  icr_tcp_server* server = nullptr;
  uint16_t bound = 0;
  const icr_status st = icr_tcp_start(engine, host.c_str(), port, kind, &server, &bound);
  if (st != ICR_OK) return Fail(st);
  std::cerr << "icrkit: listening on " << host << ":" << bound << '\n';
  int sig = 0;
  sigwait(&set, &sig);
  std::cerr << "icrkit: draining\n";
  icr_tcp_stop(server);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"icrkit: verifiable rewards and evaluation for in-context retrieval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(icr_version()));

  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for shuffling and splitting");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", g.output_dir, "Directory for output files");
  app.add_option("--judge-mode", g.judge_mode, "none, recorded or live")
      ->check(CLI::IsMember({"none", "recorded", "live"}));
  app.add_option("--judge-fixture", g.judge_fixture, "Recorded judge responses");

  auto* build = app.add_subcommand("build-data", "Build train/dev instance files");
  std::string candidates;
  bool chunk_retrieved = false;
  std::optional<double> fuzzy_threshold, train_ratio;
  std::optional<size_t> max_context_tokens;
  std::string token_counts;
  build->add_option("--candidates", candidates, "Candidate retrieval JSON lines")
      ->required();
  build->add_flag("--chunk-retrieved", chunk_retrieved,
                  "Treat retrieved entries as articles and chunk them");
  build->add_option("--fuzzy-threshold", fuzzy_threshold);
  build->add_option("--train-ratio", train_ratio);
  build->add_option("--max-context-tokens", max_context_tokens);
  build->add_option("--token-counts", token_counts, "Sidecar {id, tokens} JSON lines");

  auto* reward = app.add_subcommand("reward", "Score a file of reward requests");
  std::string requests, reward_kind;
  reward->add_option("--requests", requests, "Request or prediction JSON lines")
      ->required();
  reward->add_option("--instances", g.instances, "Instance files");
  reward->add_option("--kind", reward_kind, "Default reward kind");

  auto* serve = app.add_subcommand("serve", "Serve reward requests over NDJSON");
  std::string serve_kind, host = "127.0.0.1";
  std::optional<uint16_t> port;
  serve->add_option("--instances", g.instances, "Instance files");
  serve->add_option("--kind", serve_kind, "Default reward kind");
  serve->add_option("--port", port, "Listen on TCP instead of stdin/stdout");
  serve->add_option("--host", host, "TCP bind address");

  auto* eval = app.add_subcommand("eval", "Score predictions and attention dumps");
  std::string eval_instances, predictions, attention, aggregation = "sum", run_id;
  std::vector<std::string> metrics;
  std::optional<double> retention_fraction;
  std::optional<size_t> ndcg_k;
  eval->add_option("--instances", eval_instances, "Instance file with eval fields")
      ->required();
  eval->add_option("--predictions", predictions, "{id, output} JSON lines");
  eval->add_option("--attention", attention, "Attention dump JSON lines");
  eval->add_option("--metric", metrics, "subem, mc, rouge_l, ndcg, retention");
  eval->add_option("--aggregation", aggregation, "sum or mean")
      ->check(CLI::IsMember({"sum", "mean"}));
  eval->add_option("--retention-fraction", retention_fraction);
  eval->add_option("--ndcg-k", ndcg_k);
  eval->add_option("--run-id", run_id);

  auto* report = app.add_subcommand("report", "Drop tables and correlations from TSV");
  std::string full, compressed, corr_x, corr_y, corr_x_col = "Avg", corr_y_col = "Avg";
  std::vector<std::string> exclude;
  int decimals = 1;
  report->add_option("--full", full, "Full-context metric table");
  report->add_option("--compressed", compressed, "Compressed-cache metric table");
  report->add_option("--exclude", exclude, "Columns left out of the drop table");
  report->add_option("--corr-x", corr_x, "Table holding x");
  report->add_option("--corr-x-column", corr_x_col);
  report->add_option("--corr-y", corr_y, "Table holding y");
  report->add_option("--corr-y-column", corr_y_col);
  report->add_option("--decimals", decimals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  json extra = json::object();
  if (build->parsed()) {
    if (fuzzy_threshold) extra["fuzzy_threshold"] = *fuzzy_threshold;
    if (train_ratio) extra["build"]["train_ratio"] = *train_ratio;
    if (max_context_tokens) extra["build"]["max_context_tokens"] = *max_context_tokens;
    if (!token_counts.empty()) extra["build"]["token_counts"] = token_counts;
  }
  if (eval->parsed() && ndcg_k) extra["ndcg_k"] = *ndcg_k;

  Engine engine;
  icr_status st = OpenEngine(g, extra, engine);
  if (st != ICR_OK) return Fail(st);

  Owned out;
  if (build->parsed()) {
    json o = {{"candidates", candidates}, {"chunk_retrieved", chunk_retrieved}};
    st = icr_build_data(engine.e, o.dump().c_str(), &out.p);
    if (st != ICR_OK) return Fail(st);
    std::cout << out.str() << '\n';
    return kExitOk;
  }
  if (reward->parsed()) {
    st = icr_reward_batch_file(engine.e, requests.c_str(), nullptr,
                               reward_kind.empty() ? nullptr : reward_kind.c_str(), &out.p);
    if (st != ICR_OK) return Fail(st);
    std::cout << out.str() << '\n';
    return json::parse(out.str()).at("errors").get<size_t>() == 0 ? kExitOk : kExitPartial;
  }
  if (serve->parsed()) {
    const char* kind = serve_kind.empty() ? nullptr : serve_kind.c_str();
    if (port) return ServeTcp(engine.e, host, *port, kind);
    st = icr_serve_fd(engine.e, 0, 1, kind, &out.p);
    if (st != ICR_OK) return Fail(st);
    std::cerr << "icrkit: " << out.str() << '\n';
    return json::parse(out.str()).at("errors").get<size_t>() == 0 ? kExitOk : kExitPartial;
  }
  if (eval->parsed()) {
    json o = {{"instances", eval_instances}, {"aggregation", aggregation}};
    if (!predictions.empty()) o["predictions"] = predictions;
    if (!attention.empty()) o["attention"] = attention;
    if (!metrics.empty()) o["metrics"] = metrics;
    if (retention_fraction) o["retention_fraction"] = *retention_fraction;
    if (!run_id.empty()) o["run_id"] = run_id;
    st = icr_eval(engine.e, o.dump().c_str(), &out.p);
    if (st != ICR_OK) return Fail(st);
    const json r = json::parse(out.str());
    std::cout << r["aggregates"].dump(2) << '\n';
    return kExitOk;
  }
  if (report->parsed()) {
    json o = {{"decimals", decimals}};
    if (!full.empty()) o["full"] = full;
    if (!compressed.empty()) o["compressed"] = compressed;
    if (!exclude.empty()) o["exclude_columns"] = exclude;
    if (!corr_x.empty()) o["corr_x"] = corr_x;
    if (!corr_y.empty()) o["corr_y"] = corr_y;
    o["corr_x_column"] = corr_x_col;
    o["corr_y_column"] = corr_y_col;
    st = icr_report(engine.e, o.dump().c_str(), &out.p);
    if (st != ICR_OK) return Fail(st);
    std::cout << out.str() << '\n';
    return kExitOk;
  }
  return kExitOk;
}
