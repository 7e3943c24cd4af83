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

/*
 * icrkit C API.
 *
 * Every function returns an icr_status. On failure a message describing the
 * last error on the calling thread is available from icr_last_error().
 * Strings returned through char** out-parameters are heap allocated and must
 * be released with icr_string_free(). JSON arguments and results are UTF-8.
 */

#ifndef ICRKIT_ICRKIT_H_
#define ICRKIT_ICRKIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ICRKIT_BUILDING_LIBRARY)
#define ICRKIT_API __attribute__((visibility("default")))
#else
#define ICRKIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum icr_status {
  ICR_OK = 0,
  ICR_INVALID_ARGUMENT = 1,
  ICR_CONFIG = 2,
  ICR_IO = 3,
  ICR_PARSE = 4,
  ICR_VALIDATION = 5,
  ICR_TRANSPORT = 6, /* retryable */
  ICR_NOT_FOUND = 7,
  ICR_INTERNAL = 8
} icr_status;

typedef struct icr_engine icr_engine;
typedef struct icr_tcp_server icr_tcp_server;

ICRKIT_API const char* icr_version(void);
ICRKIT_API const char* icr_status_string(icr_status status);
/* Never NULL; empty when the calling thread has seen no error. */
ICRKIT_API const char* icr_last_error(void);
ICRKIT_API void icr_string_free(char* s);

/* ------------------------------------------------------------------------ */
/* Engine                                                                    */

/*
 * Settings are layered: defaults, then config_path (may be NULL), then
 * ICRKIT_* environment variables when apply_env is non-zero, then
 * overrides_json (a config object, may be NULL). Instance files named in the
 * resulting config are loaded.
 */
ICRKIT_API icr_status icr_engine_create(const char* config_path, int apply_env,
                                        const char* overrides_json,
                                        icr_engine** out);
ICRKIT_API void icr_engine_destroy(icr_engine* engine);

/* Effective configuration and its digest. */
ICRKIT_API icr_status icr_engine_config(const icr_engine* engine,
                                        char** config_json, char** digest);

/* Instance loading must finish before scoring starts. */
ICRKIT_API icr_status icr_engine_load_instances(icr_engine* engine,
                                                const char* path);
ICRKIT_API icr_status icr_engine_add_instance(icr_engine* engine,
                                              const char* instance_json);
ICRKIT_API icr_status icr_engine_instance_count(const icr_engine* engine,
                                                size_t* out);

/* ------------------------------------------------------------------------ */
/* Rewards                                                                   */

/*
 * Scores one request. The response object (success or per-request error) is
 * returned through response_json; the status reflects the outcome.
 * default_kind may be NULL.
 */
ICRKIT_API icr_status icr_reward(icr_engine* engine, const char* request_json,
                                 const char* default_kind, char** response_json);

/*
 * Writes rewards.jsonl, summary.json and manifest.json into output_dir.
 * Returns ICR_OK even when some lines failed; summary_json reports the error
 * count.
 */
ICRKIT_API icr_status icr_reward_batch_file(icr_engine* engine,
                                            const char* requests_path,
                                            const char* output_dir,
                                            const char* default_kind,
                                            char** summary_json);

/* Serves NDJSON until in_fd reaches end of file. Writes manifest.json into
 * the configured output_dir first. stats_json may be NULL. */
ICRKIT_API icr_status icr_serve_fd(icr_engine* engine, int in_fd, int out_fd,
                                   const char* default_kind, char** stats_json);

/* Starts a listener on a background thread; port 0 picks a free port.
 * Writes manifest.json into the configured output_dir. */
ICRKIT_API icr_status icr_tcp_start(icr_engine* engine, const char* host,
                                    uint16_t port, const char* default_kind,
                                    icr_tcp_server** out, uint16_t* bound_port);
/* Stops accepting, drains open connections and frees the server. */
ICRKIT_API void icr_tcp_stop(icr_tcp_server* server);

/* ------------------------------------------------------------------------ */
/* Pipelines                                                                 */

/*
 * options_json: {"candidates": path, "output_dir"?: path,
 *                "chunk_retrieved"?: bool}
 */
ICRKIT_API icr_status icr_build_data(icr_engine* engine,
                                     const char* options_json,
                                     char** report_json);

/*
 * options_json: {"instances": path, "predictions"?: path, "attention"?: path,
 *                "metrics"?: [str], "aggregation"?: "sum" | "mean",
 *                "retention_fraction"?: number, "output_dir"?: path,
 *                "run_id"?: str}
 */
ICRKIT_API icr_status icr_eval(icr_engine* engine, const char* options_json,
                               char** report_json);

/*
 * options_json: {"full"?: path, "compressed"?: path,
 *                "exclude_columns"?: [str], "corr_x"?: path,
 *                "corr_x_column"?: str, "corr_y"?: path,
 *                "corr_y_column"?: str, "output_dir"?: path,
 *                "decimals"?: int}
 */
ICRKIT_API icr_status icr_report(icr_engine* engine, const char* options_json,
                                 char** report_json);

/* ------------------------------------------------------------------------ */
/* Primitives                                                                */

/* remove_articles selects the answer profile (1) or the similarity one (0). */
ICRKIT_API icr_status icr_normalize(const char* s, int remove_articles,
                                    char** out);
ICRKIT_API icr_status icr_sub_exact_match(const char* prediction,
                                          const char* gold, int* out);
ICRKIT_API icr_status icr_jaccard(const char* a, const char* b, double* out);
ICRKIT_API icr_status icr_char_f1(const char* a, const char* b, double* out);
ICRKIT_API icr_status icr_ngram_overlap(const char* a, const char* b, int n,
                                        double* out);
ICRKIT_API icr_status icr_rouge_l(const char* prediction, const char* reference,
                                  double* out);
ICRKIT_API icr_status icr_ndcg_at_k(const int* ranking, size_t ranking_len,
                                    const int* relevant, size_t relevant_len,
                                    size_t k, double* out);
ICRKIT_API icr_status icr_pearson(const double* x, const double* y, size_t n,
                                  double* r, double* p);
ICRKIT_API icr_status icr_drop_percent(double full, double compressed,
                                       double* out);
ICRKIT_API icr_status icr_parse_output(const char* output, char** parsed_json);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* ICRKIT_ICRKIT_H_ */
