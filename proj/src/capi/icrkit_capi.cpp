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

#include "icrkit/icrkit.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <string>
#include <thread>
#include <vector>

#include "icrkit/config.hpp"
#include "icrkit/error.hpp"
#include "icrkit/eval_run.hpp"
#include "icrkit/evaluation.hpp"
#include "icrkit/jsonl.hpp"
#include "icrkit/manifest.hpp"
#include "icrkit/matching.hpp"
#include "icrkit/parsing.hpp"
#include "icrkit/pipeline.hpp"
#include "icrkit/service.hpp"
#include "json.hpp"

using nlohmann::json;

struct icr_engine {
  icrkit::config::RunConfig config;
  std::vector<icrkit::corpus::ContextInstance> instances;
  std::shared_ptr<icrkit::judge::JudgeClient> judge;
  bool judge_ready = false;

  std::mutex mu;
  std::shared_ptr<const icrkit::service::RewardService> service;
  std::optional<icrkit::rewards::RewardKind> service_kind;
};

struct icr_tcp_server {
  std::shared_ptr<const icrkit::service::RewardService> service;
  std::unique_ptr<icrkit::service::TcpServer> server;
  std::thread thread;
};

namespace {

thread_local std::string g_last_error;

icr_status ToStatus(icrkit::ErrorCode code) { return static_cast<icr_status>(code); }

template <typename Fn>
icr_status Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ICR_OK;
  } catch (const icrkit::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return ICR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ICR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ICR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ICR_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw icrkit::Error(icrkit::ErrorCode::kInvalidArgument, what);
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

json ParseOptions(const char* options_json) {
  Require(options_json != nullptr, "options_json is null");
  json j;
  try {
    j = json::parse(options_json);
  } catch (const json::exception& e) {
    throw icrkit::Error(icrkit::ErrorCode::kConfig, std::string("bad options: ") + e.what());
  }
  if (!j.is_object()) throw icrkit::Error(icrkit::ErrorCode::kConfig, "options must be an object");
  return j;
}

template <typename T>
T Opt(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw icrkit::Error(icrkit::ErrorCode::kConfig,
                        std::string("bad option '") + key + "': " + e.what());
  }
}

std::optional<icrkit::rewards::RewardKind> KindArg(const char* kind) {
  if (kind == nullptr || *kind == '\0') return std::nullopt;
  const auto k = icrkit::rewards::ParseRewardKind(kind);
  if (!k) {
    throw icrkit::Error(icrkit::ErrorCode::kConfig,
                        std::string("unknown reward kind '") + kind + "'");
  }
  return k;
}

void EnsureJudge(icr_engine* e) {
  if (e->judge_ready) return;
  e->judge = icrkit::judge::MakeJudge(e->config.judge);
  e->judge_ready = true;
}

std::shared_ptr<const icrkit::service::RewardService> ServiceFor(
    icr_engine* e, std::optional<icrkit::rewards::RewardKind> kind) {
  std::lock_guard<std::mutex> lock(e->mu);
  EnsureJudge(e);
  if (!e->service || e->service_kind != kind) {
    e->service = std::make_shared<icrkit::service::RewardService>(
        e->instances, e->config.Rewards(), e->judge, kind);
    e->service_kind = kind;
  }
  return e->service;
}

void Invalidate(icr_engine* e) {
  std::lock_guard<std::mutex> lock(e->mu);
  e->service.reset();
}

icrkit::Manifest MakeManifest(const icr_engine* e, const std::string& command,
                              std::vector<std::filesystem::path> inputs) {
  icrkit::Manifest m;
  m.command = command;
  m.config_digest = e->config.Digest();
  for (const auto& p : e->config.corpus) inputs.push_back(p);
  if (e->config.judge.mode == icrkit::judge::JudgeMode::kRecorded) {
    inputs.emplace_back(e->config.judge.fixture);
  }
  if (!e->config.token_counts.empty() && command == "build-data") {
    inputs.push_back(e->config.token_counts);
  }
  m.inputs = std::move(inputs);
  m.seed = e->config.seed;
  return m;
}

}  // namespace

extern "C" {

const char* icr_version(void) { return ICRKIT_VERSION; }

const char* icr_status_string(icr_status status) {
  switch (status) {
    case ICR_OK: return "ok";
    case ICR_INVALID_ARGUMENT: return "invalid argument";
    case ICR_CONFIG: return "configuration error";
    case ICR_IO: return "i/o error";
    case ICR_PARSE: return "parse error";
    case ICR_VALIDATION: return "validation error";
    case ICR_TRANSPORT: return "transport error";
    case ICR_NOT_FOUND: return "not found";
    case ICR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* icr_last_error(void) { return g_last_error.c_str(); }

void icr_string_free(char* s) { std::free(s); }

icr_status icr_engine_create(const char* config_path, int apply_env,
                             const char* overrides_json, icr_engine** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = nullptr;
    auto e = std::make_unique<icr_engine>();
    if (config_path != nullptr && *config_path != '\0') {
      icrkit::config::ApplyFile(e->config, config_path);
    }
    if (apply_env) icrkit::config::ApplyEnv(e->config);
    if (overrides_json != nullptr && *overrides_json != '\0') {
      icrkit::config::ApplyJson(e->config, ParseOptions(overrides_json));
    }
    e->config.Validate();
    e->instances = icrkit::service::LoadInstances(e->config.corpus);
    *out = e.release();
  });
}

void icr_engine_destroy(icr_engine* engine) { delete engine; }

icr_status icr_engine_config(const icr_engine* engine, char** config_json, char** digest) {
  return Guard([&] {
    Require(engine != nullptr, "engine is null");
    json j = engine->config.ToJson();
    j["workers"] = engine->config.workers;
    j["output_dir"] = engine->config.output_dir.string();
    if (config_json != nullptr) *config_json = Dup(j.dump(2));
    if (digest != nullptr) *digest = Dup(engine->config.Digest());
  });
}

icr_status icr_engine_load_instances(icr_engine* engine, const char* path) {
  return Guard([&] {
    Require(engine != nullptr && path != nullptr, "null argument");
    auto loaded = icrkit::service::LoadInstances({path});
    std::set<std::string> ids;
    for (const auto& i : engine->instances) ids.insert(i.id);
    for (const auto& i : loaded) {
      if (!ids.insert(i.id).second) {
        throw icrkit::Error(icrkit::ErrorCode::kValidation,
                            "duplicate instance id '" + i.id + "'");
      }
    }
    for (auto& i : loaded) engine->instances.push_back(std::move(i));
    engine->config.corpus.emplace_back(path);
    Invalidate(engine);
  });
}

icr_status icr_engine_add_instance(icr_engine* engine, const char* instance_json) {
  return Guard([&] {
    Require(engine != nullptr && instance_json != nullptr, "null argument");
    json j;
    try {
      j = json::parse(instance_json);
    } catch (const json::exception& e) {
      throw icrkit::Error(icrkit::ErrorCode::kParse, e.what());
    }
    auto inst = icrkit::corpus::InstanceFromJson(j);
    for (const auto& i : engine->instances) {
      if (i.id == inst.id) {
        throw icrkit::Error(icrkit::ErrorCode::kValidation,
                            "duplicate instance id '" + inst.id + "'");
      }
    }
    engine->instances.push_back(std::move(inst));
    Invalidate(engine);
  });
}

icr_status icr_engine_instance_count(const icr_engine* engine, size_t* out) {
  return Guard([&] {
    Require(engine != nullptr && out != nullptr, "null argument");
    *out = engine->instances.size();
  });
}

icr_status icr_reward(icr_engine* engine, const char* request_json,
                      const char* default_kind, char** response_json) {
  icrkit::ErrorCode failure = icrkit::ErrorCode::kOk;
  std::string message;
  const icr_status st = Guard([&] {
    Require(engine != nullptr && request_json != nullptr && response_json != nullptr,
            "null argument");
    *response_json = nullptr;
    const auto svc = ServiceFor(engine, KindArg(default_kind));
    const json response = svc->HandleLine(request_json, 1);
    *response_json = Dup(icrkit::jsonl::Dump(response));
    if (icrkit::service::IsErrorResponse(response)) {
      const std::string code = response["error"]["code"].get<std::string>();
      message = response["error"]["message"].get<std::string>();
      failure = icrkit::ErrorCode::kInternal;
      for (int c = 0; c <= 8; ++c) {
        if (icrkit::ErrorCodeName(static_cast<icrkit::ErrorCode>(c)) == code) {
          failure = static_cast<icrkit::ErrorCode>(c);
        }
      }
    }
  });
  if (st != ICR_OK) return st;
  if (failure != icrkit::ErrorCode::kOk) {
    g_last_error = message;
    return ToStatus(failure);
  }
  return ICR_OK;
}

icr_status icr_reward_batch_file(icr_engine* engine, const char* requests_path,
                                 const char* output_dir, const char* default_kind,
                                 char** summary_json) {
  return Guard([&] {
    Require(engine != nullptr && requests_path != nullptr, "null argument");
    const std::filesystem::path dir =
        output_dir != nullptr && *output_dir != '\0' ? std::filesystem::path(output_dir)
                                                     : engine->config.output_dir;
    if (!std::filesystem::exists(requests_path)) {
      throw icrkit::Error(icrkit::ErrorCode::kIo,
                          std::string("request file not found: ") + requests_path);
    }
    auto manifest = MakeManifest(engine, "reward", {requests_path});
    const auto svc = ServiceFor(engine, KindArg(default_kind));
    icrkit::service::BatchOptions opts;
    opts.requests = requests_path;
    opts.output = dir / "rewards.jsonl";
    opts.workers = engine->config.workers;
    const auto summary = icrkit::service::RunBatch(*svc, opts);
    const std::string s = summary.ToJson().dump(2);
    icrkit::jsonl::WriteFile(dir / "summary.json", s + "\n");
    icrkit::WriteManifest(dir / "manifest.json", manifest);
    if (summary_json != nullptr) *summary_json = Dup(s);
  });
}

icr_status icr_serve_fd(icr_engine* engine, int in_fd, int out_fd,
                        const char* default_kind, char** stats_json) {
  return Guard([&] {
    Require(engine != nullptr, "engine is null");
    const auto svc = ServiceFor(engine, KindArg(default_kind));
    icrkit::WriteManifest(engine->config.output_dir / "manifest.json",
                          MakeManifest(engine, "serve", {}));
    const auto stats = icrkit::service::ServeFd(*svc, in_fd, out_fd, engine->config.workers);
    if (stats_json != nullptr) {
      *stats_json = Dup(json{{"requests", stats.requests}, {"errors", stats.errors}}.dump());
    }
  });
}

icr_status icr_tcp_start(icr_engine* engine, const char* host, uint16_t port,
                         const char* default_kind, icr_tcp_server** out,
                         uint16_t* bound_port) {
  return Guard([&] {
    Require(engine != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto s = std::make_unique<icr_tcp_server>();
    s->service = ServiceFor(engine, KindArg(default_kind));
    icrkit::WriteManifest(engine->config.output_dir / "manifest.json",
                          MakeManifest(engine, "serve", {}));
    s->server = std::make_unique<icrkit::service::TcpServer>(*s->service,
                                                              engine->config.workers);
    const auto p = s->server->Listen(host != nullptr ? host : "127.0.0.1", port);
    if (bound_port != nullptr) *bound_port = p;
    auto* raw = s->server.get();
    s->thread = std::thread([raw] { raw->Run(); });
    *out = s.release();
  });
}

void icr_tcp_stop(icr_tcp_server* server) {
  if (server == nullptr) return;
  server->server->Stop();
  if (server->thread.joinable()) server->thread.join();
  delete server;
}

icr_status icr_build_data(icr_engine* engine, const char* options_json, char** report_json) {
  return Guard([&] {
    Require(engine != nullptr, "engine is null");
    const json o = ParseOptions(options_json);
    icrkit::pipeline::BuildDataOptions opts;
    opts.candidates = Opt<std::string>(o, "candidates", "");
    if (opts.candidates.empty()) {
      throw icrkit::Error(icrkit::ErrorCode::kConfig, "build-data needs a candidates file");
    }
    opts.output_dir = Opt<std::string>(o, "output_dir", engine->config.output_dir.string());
    opts.build = engine->config.Build();
    opts.train_ratio = engine->config.train_ratio;
    opts.token_counts = engine->config.token_counts;
    opts.chunk_retrieved = Opt<bool>(o, "chunk_retrieved", false);
    opts.workers = engine->config.workers;
    opts.judge_max_in_flight = engine->config.judge_max_in_flight;
    auto manifest = MakeManifest(engine, "build-data", {opts.candidates});
    {
      std::lock_guard<std::mutex> lock(engine->mu);
      EnsureJudge(engine);
    }
    const auto result = icrkit::pipeline::BuildData(opts, engine->judge.get());
    icrkit::WriteManifest(opts.output_dir / "manifest.json", manifest);
    if (report_json != nullptr) *report_json = Dup(result.report.dump(2));
  });
}

icr_status icr_eval(icr_engine* engine, const char* options_json, char** report_json) {
  return Guard([&] {
    Require(engine != nullptr, "engine is null");
    const json o = ParseOptions(options_json);
    icrkit::eval_run::EvalOptions opts;
    opts.instances = Opt<std::string>(o, "instances", "");
    opts.predictions = Opt<std::string>(o, "predictions", "");
    opts.attention = Opt<std::string>(o, "attention", "");
    opts.metrics = Opt<std::vector<std::string>>(o, "metrics", {});
    const auto agg = Opt<std::string>(o, "aggregation", "sum");
    if (agg == "sum") {
      opts.aggregation = icrkit::evaluation::AttentionAggregation::kSum;
    } else if (agg == "mean") {
      opts.aggregation = icrkit::evaluation::AttentionAggregation::kMean;
    } else {
      throw icrkit::Error(icrkit::ErrorCode::kConfig, "aggregation must be 'sum' or 'mean'");
    }
    opts.retention_fraction = Opt<double>(o, "retention_fraction", 0.1);
    opts.ndcg_k = engine->config.ndcg_k;
    opts.output_dir = Opt<std::string>(o, "output_dir", engine->config.output_dir.string());
    opts.run_id = Opt<std::string>(o, "run_id", "");
    opts.workers = engine->config.workers;
    for (const auto& p : {opts.predictions, opts.attention}) {
      if (!p.empty() && !std::filesystem::exists(p)) {
        throw icrkit::Error(icrkit::ErrorCode::kIo, "input not found: " + p.string());
      }
    }
    auto manifest =
        MakeManifest(engine, "eval", {opts.instances, opts.predictions, opts.attention});
    if (opts.run_id.empty()) opts.run_id = manifest.started_at;
    const json report = icrkit::eval_run::RunEval(opts);
    icrkit::WriteManifest(opts.output_dir / "manifest.json", manifest);
    if (report_json != nullptr) *report_json = Dup(report.dump(2));
  });
}

icr_status icr_report(icr_engine* engine, const char* options_json, char** report_json) {
  return Guard([&] {
    Require(engine != nullptr, "engine is null");
    const json o = ParseOptions(options_json);
    icrkit::eval_run::ReportOptions opts;
    opts.full = Opt<std::string>(o, "full", "");
    opts.compressed = Opt<std::string>(o, "compressed", "");
    opts.exclude_columns = Opt<std::vector<std::string>>(o, "exclude_columns", {});
    opts.corr_x = Opt<std::string>(o, "corr_x", "");
    opts.corr_x_column = Opt<std::string>(o, "corr_x_column", "Avg");
    opts.corr_y = Opt<std::string>(o, "corr_y", "");
    opts.corr_y_column = Opt<std::string>(o, "corr_y_column", "Avg");
    opts.output_dir = Opt<std::string>(o, "output_dir", engine->config.output_dir.string());
    opts.decimals = Opt<int>(o, "decimals", 1);
    for (const auto& p : {opts.full, opts.compressed, opts.corr_x, opts.corr_y}) {
      if (!p.empty() && !std::filesystem::exists(p)) {
        throw icrkit::Error(icrkit::ErrorCode::kIo, "input not found: " + p.string());
      }
    }
    auto manifest = MakeManifest(
        engine, "report", {opts.full, opts.compressed, opts.corr_x, opts.corr_y});
    const json report = icrkit::eval_run::RunReport(opts);
    icrkit::WriteManifest(opts.output_dir / "manifest.json", manifest);
    if (report_json != nullptr) *report_json = Dup(report.dump(2));
  });
}

icr_status icr_normalize(const char* s, int remove_articles, char** out) {
  return Guard([&] {
    Require(s != nullptr && out != nullptr, "null argument");
    const auto rules = remove_articles ? icrkit::matching::NormalizationRules::Answer()
                                       : icrkit::matching::NormalizationRules::Similarity();
    *out = Dup(icrkit::matching::Normalize(s, rules));
  });
}

icr_status icr_sub_exact_match(const char* prediction, const char* gold, int* out) {
  return Guard([&] {
    Require(prediction != nullptr && gold != nullptr && out != nullptr, "null argument");
    *out = icrkit::matching::SubExactMatch(prediction, gold) ? 1 : 0;
  });
}

icr_status icr_jaccard(const char* a, const char* b, double* out) {
  return Guard([&] {
    Require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = icrkit::matching::JaccardSimilarity(a, b);
  });
}

icr_status icr_char_f1(const char* a, const char* b, double* out) {
  return Guard([&] {
    Require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = icrkit::matching::CharF1(a, b);
  });
}

icr_status icr_ngram_overlap(const char* a, const char* b, int n, double* out) {
  return Guard([&] {
    Require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    Require(n >= 1, "n must be >= 1");
    *out = icrkit::matching::NgramOverlap(a, b, n);
  });
}

icr_status icr_rouge_l(const char* prediction, const char* reference, double* out) {
  return Guard([&] {
    Require(prediction != nullptr && reference != nullptr && out != nullptr, "null argument");
    *out = icrkit::evaluation::RougeL(prediction, reference);
  });
}

icr_status icr_ndcg_at_k(const int* ranking, size_t ranking_len, const int* relevant,
                         size_t relevant_len, size_t k, double* out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    Require(ranking != nullptr || ranking_len == 0, "ranking is null");
    Require(relevant != nullptr || relevant_len == 0, "relevant is null");
    const std::set<int> rel(relevant, relevant + relevant_len);
    *out = icrkit::evaluation::NdcgAtK(std::span<const int>(ranking, ranking_len), rel, k);
  });
}

icr_status icr_pearson(const double* x, const double* y, size_t n, double* r, double* p) {
  return Guard([&] {
    Require(x != nullptr && y != nullptr, "null input");
    const auto res = icrkit::evaluation::Pearson(std::span<const double>(x, n),
                                                 std::span<const double>(y, n));
    if (r != nullptr) *r = res.r;
    if (p != nullptr) *p = res.p;
  });
}

icr_status icr_drop_percent(double full, double compressed, double* out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = icrkit::evaluation::DropPercent(full, compressed);
  });
}

icr_status icr_parse_output(const char* output, char** parsed_json) {
  return Guard([&] {
    Require(output != nullptr && parsed_json != nullptr, "null argument");
    *parsed_json = Dup(icrkit::jsonl::Dump(icrkit::parsing::ToJson(icrkit::parsing::ParseOutput(output))));
  });
}

}  // extern "C"
