// Copyright 2026 The textspot Authors.
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

/* C interface to the textspot library: opaque handles, status codes and
 * heap strings released with ts_string_free. All functions are reentrant;
 * handles must not be shared across threads while one of them mutates it. */
#ifndef TEXTSPOT_TEXTSPOT_H_
#define TEXTSPOT_TEXTSPOT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TEXTSPOT_BUILDING_LIBRARY)
#define TS_API __attribute__((visibility("default")))
#else
#define TS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
  TS_OK = 0,
  TS_ERR_ARGUMENT = 1,
  TS_ERR_VALIDATION = 2,
  TS_ERR_CAPACITY = 3,
  TS_ERR_PARSE = 4,
  TS_ERR_IO = 5,
  TS_ERR_NUMERIC = 6,
  TS_ERR_INTERNAL = 7
} ts_status;

typedef struct ts_config ts_config;
typedef struct ts_dataset ts_dataset;
typedef struct ts_model ts_model;

TS_API const char* ts_version(void);
TS_API const char* ts_status_name(ts_status status);
/* Message of the last failed call on this thread ("" if none). */
TS_API const char* ts_last_error(void);
/* Process exit code for a status: 0 success, 1 runtime failure, 2 usage or
 * configuration error. */
TS_API int ts_exit_code(ts_status status);
TS_API void ts_string_free(char* str);

/* Experiment configuration (JSON). */
TS_API ts_status ts_config_default(ts_config** out);
TS_API ts_status ts_config_load(const char* path, ts_config** out);
/* Dotted key, JSON value: ts_config_set(cfg, "world.noise", "0.2"). */
TS_API ts_status ts_config_set(ts_config* cfg, const char* key,
                               const char* value);
TS_API ts_status ts_config_to_json(const ts_config* cfg, char** out_json);
TS_API void ts_config_free(ts_config* cfg);

/* Scene datasets. alphabet == NULL selects lowercase letters and digits. */
TS_API ts_status ts_dataset_load(const char* path, const char* alphabet,
                                 size_t max_word_len, ts_dataset** out);
TS_API size_t ts_dataset_size(const ts_dataset* data);
TS_API void ts_dataset_free(ts_dataset* data);

/* Writes domain_{a,b}_{full,weak}.jsonl (cfg train_scenes each) to out_dir
 * and returns a JSON manifest. */
TS_API ts_status ts_generate(const ts_config* cfg, const char* out_dir,
                             uint64_t seed, char** out_manifest_json);

/* Corner boxes (x1, y1, x2, y2). */
TS_API ts_status ts_iou(const double a[4], const double b[4], double* out);
TS_API ts_status ts_giou(const double a[4], const double b[4], double* out);

/* Row-major rows x cols costs, rows <= cols. out_assignment has rows slots. */
TS_API ts_status ts_solve_assignment(const double* costs, size_t rows,
                                     size_t cols, size_t* out_assignment,
                                     double* out_total);

/* Matching and loss of raw (logit) predictions against ground truth.
 * mode is "full", "weak" or "detcls". Results are JSON documents. */
TS_API ts_status ts_match(const char* raw_preds_path, const ts_dataset* gt,
                          const ts_config* cfg, const char* mode,
                          char** out_json);
TS_API ts_status ts_loss(const char* raw_preds_path, const ts_dataset* gt,
                         const ts_config* cfg, const char* mode,
                         char** out_json);

/* Toy model. */
TS_API ts_status ts_model_init(const ts_config* cfg, uint64_t seed,
                               ts_model** out);
TS_API ts_status ts_model_load(const char* path, ts_model** out);
TS_API ts_status ts_model_save(const ts_model* model, const char* path);
/* *out_equal = 1 when every parameter whose name starts with prefix is
 * bitwise identical in both models. */
TS_API ts_status ts_model_params_equal(const ts_model* a, const ts_model* b,
                                       const char* prefix, int* out_equal);
TS_API void ts_model_free(ts_model* model);
/* Trains in place with cfg's train section; returns the loss history. */
TS_API ts_status ts_train(ts_model* model, const ts_dataset* scenes,
                          const ts_config* cfg, char** out_history_json);
/* raw == 0 writes decoded detections above the score threshold; raw != 0
 * writes every query's logits. */
TS_API ts_status ts_predict(const ts_model* model, const ts_dataset* scenes,
                            const ts_config* cfg, const char* out_path,
                            int raw);

/* task is "e2e", "wordspotting" or "detection"; lexicon_path may be NULL.
 * The predictions file may also be a scene dataset (ground truth as
 * predictions). */
TS_API ts_status ts_evaluate(const char* preds_path, const ts_dataset* gt,
                             const char* task, double iou_threshold,
                             const char* lexicon_path, char** out_json);

/* name: weak_vs_synthetic, detection_ablation or matching_ablation. Returns
 * one JSON record per arm and line. */
TS_API ts_status ts_run_experiment(const ts_config* cfg, const char* name,
                                   int include_timing, char** out_jsonl);

#ifdef __cplusplus
}
#endif

#endif /* TEXTSPOT_TEXTSPOT_H_ */
