//------------------------------------------------------------------------------
//
//   Copyright 2026 The ctvae Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------


/* C interface to the ctvae engine. Handles are opaque; every fallible call
 * returns a ctvae_status and leaves a message in ctvae_last_error(). Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with ctvae_string_free(). Structured arguments are JSON text. */

#ifndef CTVAE_CTVAE_H
#define CTVAE_CTVAE_H

#include <stddef.h>
#include <stdint.h>

#if defined(CTVAE_BUILDING_LIBRARY)
#define CTVAE_API __attribute__((visibility("default")))
#else
#define CTVAE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctvae_status
{
  CTVAE_OK               = 0,
  CTVAE_E_ARGUMENT       = 1,
  CTVAE_E_PARSE          = 2,
  CTVAE_E_VALIDATION     = 3,
  CTVAE_E_HEADER         = 4,
  CTVAE_E_ENCODING       = 5,
  CTVAE_E_CONTRACT       = 6,
  CTVAE_E_NUMERIC        = 7,
  CTVAE_E_TRAINING       = 8,
  CTVAE_E_IO             = 9,
  CTVAE_E_CORRUPTION     = 10,
  CTVAE_E_VERSION        = 11,
  CTVAE_E_NOT_FOUND      = 12,
  CTVAE_E_INTERNAL       = 99
} ctvae_status;

typedef struct ctvae_model ctvae_model;
typedef struct ctvae_batch ctvae_batch;

typedef void (*ctvae_log_fn)(char const *message, void *user);

CTVAE_API char const *ctvae_version(void);
CTVAE_API char const *ctvae_status_name(ctvae_status status);

/* Message of the last failed call on this thread ("" if none). */
CTVAE_API char const *ctvae_last_error(void);

CTVAE_API void ctvae_string_free(char *s);

/* Progress lines from long operations (training epochs, experiment stages).
 * Pass NULL to silence. */
CTVAE_API void ctvae_set_log_callback(ctvae_log_fn fn, void *user);

/* Product-level holdout split of a CSV table. Writes both partitions and
 * returns {"train_products": [...], "test_products": [...], "seed": s}. */
CTVAE_API ctvae_status ctvae_split_csv(char const *data_csv, char const *schema_path, size_t test_groups,
                                       uint64_t seed, char const *train_out, char const *test_out,
                                       char **result_json);

/* Trains on a CSV table. config_json holds training options (may be NULL).
 * history_json (may be NULL) receives the per-epoch history. */
CTVAE_API ctvae_status ctvae_fit(char const *data_csv, char const *schema_path, char const *config_json,
                                 ctvae_model **out, char **history_json);

CTVAE_API ctvae_status ctvae_model_load(char const *path, char const *catalog_csv, ctvae_model **out);
CTVAE_API ctvae_status ctvae_model_save(ctvae_model const *model, char const *path);
CTVAE_API void         ctvae_model_free(ctvae_model *model);

/* {"model_id", "group_key", "columns": [...], ...} */
CTVAE_API ctvae_status ctvae_model_schema_json(ctvae_model const *model, char **out);
CTVAE_API ctvae_status ctvae_model_products_json(ctvae_model const *model, char **out);

/* request_json: {"base_product": id} or {"base": {...}}, plus optional
 * "overrides", "n", "seed". */
CTVAE_API ctvae_status ctvae_generate(ctvae_model const *model, char const *request_json, ctvae_batch **out);
CTVAE_API ctvae_status ctvae_whatif(ctvae_model const *model, char const *request_json, char **response_json);

CTVAE_API size_t       ctvae_batch_rows(ctvae_batch const *batch);
CTVAE_API ctvae_status ctvae_batch_write_csv(ctvae_batch const *batch, char const *path);
CTVAE_API ctvae_status ctvae_batch_provenance_json(ctvae_batch const *batch, char **out);
CTVAE_API void         ctvae_batch_free(ctvae_batch *batch);

/* options_json (may be NULL): {"bins", "kind", "range": [lo, hi],
 * "model": path}. With a model, categories and bins follow its vocabulary
 * and training range. */
CTVAE_API ctvae_status ctvae_summarize_csv(char const *csv_path, char const *column, char const *options_json,
                                           char **out);

/* Per-column complements and MC of synth against real over the schema's
 * target columns. */
CTVAE_API ctvae_status ctvae_evaluate_csv(char const *real_csv, char const *synth_csv, char const *schema_path,
                                          char **out);

/* spec_path may be NULL for the built-in flip corpus. */
CTVAE_API ctvae_status ctvae_make_corpus(char const *spec_path, uint64_t seed, char const *out_dir);

/* Runs the experiment config and writes the report. output_dir may be NULL
 * to use the config's directory. summary_json receives the aggregate table. */
CTVAE_API ctvae_status ctvae_sweep(char const *config_path, char const *output_dir, char **summary_json);

/* Blocks serving HTTP until the process ends. */
CTVAE_API ctvae_status ctvae_serve(char const *model_path, char const *catalog_csv, char const *bind_address,
                                   size_t max_n);

#ifdef __cplusplus
}
#endif

#endif
