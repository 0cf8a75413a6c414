// Copyright 2026 The scenesim Authors
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


#ifndef SCENESIM__SCENESIM_H_
#define SCENESIM__SCENESIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SCENESIM_BUILDING_LIBRARY)
#define SSIM_API __attribute__((visibility("default")))
#else
#define SSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssim_status {
  SSIM_OK = 0,
  SSIM_INVALID_ARGUMENT = 1,
  SSIM_PARSE_ERROR = 2,
  SSIM_SCHEMA_ERROR = 3,
  SSIM_VALIDATION_ERROR = 4,
  SSIM_IO_ERROR = 5,
  SSIM_NUMERIC_ERROR = 6,
  SSIM_RUNTIME_ERROR = 7,
} ssim_status;

typedef struct ssim_config ssim_config;
typedef struct ssim_corpus ssim_corpus;
typedef struct ssim_vocab ssim_vocab;
typedef struct ssim_run ssim_run;

/* Message of the last failed call on this thread; empty when none. */
SSIM_API const char * ssim_last_error(void);
SSIM_API const char * ssim_status_name(ssim_status status);
SSIM_API const char * ssim_version(void);
/* Releases strings returned through char ** out-parameters. */
SSIM_API void ssim_string_free(char * s);

/* Pipeline configuration. */
SSIM_API ssim_status ssim_config_create(ssim_config ** out);
SSIM_API ssim_status ssim_config_load(const char * path, ssim_config ** out);
SSIM_API ssim_status ssim_config_from_json(const char * json, ssim_config ** out);
/* Applies a partial JSON object on top of the current values and revalidates. */
SSIM_API ssim_status ssim_config_patch(ssim_config * config, const char * json);
SSIM_API ssim_status ssim_config_to_json(const ssim_config * config, char ** out);
SSIM_API ssim_status ssim_config_hash(const ssim_config * config, char ** out);
SSIM_API void ssim_config_free(ssim_config * config);

/* Scenario corpus. A null corpus_config_json uses the defaults; a negative count keeps
   the configured per-template counts, otherwise count is spread round-robin. */
SSIM_API ssim_status ssim_corpus_synthesize(
  const char * corpus_config_json, int count, uint64_t seed, ssim_corpus ** out);
SSIM_API ssim_status ssim_corpus_load_dir(const char * dir, ssim_corpus ** out);
SSIM_API ssim_status ssim_corpus_write_dir(const ssim_corpus * corpus, const char * dir);
SSIM_API size_t ssim_corpus_size(const ssim_corpus * corpus);
SSIM_API void ssim_corpus_free(ssim_corpus * corpus);

/* Clustered trajectory vocabulary. */
SSIM_API ssim_status ssim_vocab_build(const ssim_config * config, size_t k, uint64_t seed, ssim_vocab ** out);
SSIM_API ssim_status ssim_vocab_load(const char * path, ssim_vocab ** out);
SSIM_API ssim_status ssim_vocab_save(const ssim_vocab * vocab, const char * path);
SSIM_API size_t ssim_vocab_size(const ssim_vocab * vocab);
SSIM_API void ssim_vocab_free(ssim_vocab * vocab);

/* Data generation. A null vocab builds the perturbation vocabulary from the config. */
SSIM_API ssim_status ssim_generate(
  const ssim_corpus * corpus, const ssim_vocab * vocab, const ssim_config * config, ssim_run ** out);
SSIM_API ssim_status ssim_run_export(const ssim_run * run, const char * dir);
SSIM_API size_t ssim_run_sample_count(const ssim_run * run);
SSIM_API ssim_status ssim_run_stats_csv(const ssim_run * run, char ** out);
SSIM_API ssim_status ssim_run_manifest(const ssim_run * run, char ** out);
SSIM_API void ssim_run_free(ssim_run * run);

/* Metric report of a trajectory file rolled out from start_frame in mode
   "reactive" or "non-reactive". SSIM_START_AT_HISTORY starts after the scenario's
   history. A null config uses the defaults. */
#define SSIM_START_AT_HISTORY ((size_t)-1)
SSIM_API ssim_status ssim_eval_trajectory(
  const char * scenario_path, const char * trajectory_path, const char * mode, size_t start_frame,
  const ssim_config * config, char ** report_json);

typedef struct ssim_fit {
  double a;
  double b;
  double c;
  double residual_std;
  int has_saturation;
  double saturation_n;
} ssim_fit;

SSIM_API ssim_status ssim_fit_log_quadratic(const double * n, const double * s, size_t count, ssim_fit * out);
/* Fits every labeled CSV, writes one curve CSV per label and report.json into out_dir,
   and returns the report. */
SSIM_API ssim_status ssim_scaling_report(
  const char * const * labels, const char * const * csv_paths, size_t count, const char * out_dir,
  char ** report_json);

/* Summary of a dataset.jsonl; a non-null corpus re-verifies every record. */
SSIM_API ssim_status ssim_dataset_stats(
  const char * jsonl_path, const ssim_corpus * corpus, const ssim_config * config, char ** out);

#ifdef __cplusplus
}
#endif

#endif  // SCENESIM__SCENESIM_H_
