// Copyright 2026 The CCL Authors.
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
 * C interface to the cluster-aware contrastive learning library.
 *
 * Objects are opaque handles created by the *_create / *_generate / *_load /
 * ccl_train functions and released with the matching *_destroy. Every
 * fallible call returns a ccl_status; on failure ccl_last_error() describes
 * the problem. The error text is thread-local and valid until the next call
 * on the same thread.
 */

#ifndef CCL_CCL_H_
#define CCL_CCL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CCL_API __declspec(dllexport)
#else
#define CCL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 2 and 3 double as the CLI exit codes. */
typedef enum ccl_status {
  CCL_OK = 0,
  CCL_ERR_INTERNAL = 1,
  CCL_ERR_CONFIG = 2,
  CCL_ERR_NUMERIC = 3,
  CCL_ERR_IO = 4,
  CCL_ERR_ARGUMENT = 5
} ccl_status;

typedef struct ccl_config ccl_config;
typedef struct ccl_dataset ccl_dataset;
typedef struct ccl_model ccl_model;
typedef struct ccl_report ccl_report;
typedef struct ccl_ablation ccl_ablation;

CCL_API const char* ccl_version(void);
CCL_API const char* ccl_last_error(void);

/* Configuration: defaults, then files, then individual keys. */
CCL_API ccl_status ccl_config_create(ccl_config** out);
CCL_API void ccl_config_destroy(ccl_config* config);
CCL_API ccl_status ccl_config_load_file(ccl_config* config, const char* path);
CCL_API ccl_status ccl_config_set(ccl_config* config, const char* key,
                                  const char* value);
/* Copies the value into buf (NUL-terminated). *needed receives the length
 * without the terminator; pass buf = NULL to query it. */
CCL_API ccl_status ccl_config_get(const ccl_config* config, const char* key,
                                  char* buf, size_t buflen, size_t* needed);
CCL_API ccl_status ccl_config_validate(const ccl_config* config);
CCL_API ccl_status ccl_config_hash(const ccl_config* config, uint64_t* out);

/* Datasets: a directory of per-set CSV files plus bundle.txt. */
CCL_API ccl_status ccl_dataset_generate(const ccl_config* config,
                                        ccl_dataset** out);
CCL_API ccl_status ccl_dataset_load(const char* dir, ccl_dataset** out);
CCL_API ccl_status ccl_dataset_save(const ccl_dataset* dataset, const char* dir);
CCL_API void ccl_dataset_destroy(ccl_dataset* dataset);
CCL_API size_t ccl_dataset_num_sets(const ccl_dataset* dataset);
/* Set i in order id_train, id_test, OOD sets. */
CCL_API ccl_status ccl_dataset_set_info(const ccl_dataset* dataset, size_t index,
                                        const char** name, size_t* rows,
                                        size_t* dims);

/* Training. metrics_csv may be NULL. */
CCL_API ccl_status ccl_train(const ccl_config* config,
                             const ccl_dataset* dataset,
                             const char* metrics_csv, ccl_model** out);
CCL_API ccl_status ccl_model_save(const ccl_model* model, const char* path);
CCL_API ccl_status ccl_model_load(const char* path, ccl_model** out);
CCL_API void ccl_model_destroy(ccl_model* model);
CCL_API ccl_status ccl_model_config_hash(const ccl_model* model, uint64_t* out);
/* Number of epochs at which centers were refit; copies up to cap of them. */
CCL_API size_t ccl_model_refit_epochs(const ccl_model* model, size_t* epochs,
                                      size_t cap);

/* Evaluation. score_kind is "cos" or "var". */
CCL_API ccl_status ccl_evaluate(const ccl_model* model,
                                const ccl_dataset* dataset,
                                const char* score_kind, size_t k_top,
                                ccl_report** out);
CCL_API ccl_status ccl_report_write(const ccl_report* report,
                                    const char* scores_csv,
                                    const char* summary_csv);
CCL_API size_t ccl_report_num_ood_sets(const ccl_report* report);
CCL_API ccl_status ccl_report_auroc(const ccl_report* report, size_t index,
                                    const char** name, double* auroc);
CCL_API void ccl_report_destroy(ccl_report* report);

/* Feature export. layer is "embedding" or "projection". */
CCL_API ccl_status ccl_export_features(const ccl_model* model,
                                       const ccl_dataset* dataset,
                                       const char* layer, const char* path);

/* Ablation sweeps: "table2", "table3", "table4", "table5", "score".
 * progress may be NULL. */
typedef void (*ccl_progress_fn)(const char* variant, uint64_t seed,
                                void* user);
CCL_API ccl_status ccl_ablate(const ccl_config* config, const char* sweep,
                              ccl_progress_fn progress, void* user,
                              ccl_ablation** out);
CCL_API ccl_status ccl_ablation_write(const ccl_ablation* ablation,
                                      const char* path);
CCL_API size_t ccl_ablation_num_variants(const ccl_ablation* ablation);
CCL_API size_t ccl_ablation_num_ood_sets(const ccl_ablation* ablation);
/* Mean AUROC over seeds for variant v on OOD set s. */
CCL_API ccl_status ccl_ablation_mean_auroc(const ccl_ablation* ablation,
                                           size_t v, size_t s,
                                           const char** variant,
                                           const char** ood_set, double* mean);
CCL_API void ccl_ablation_destroy(ccl_ablation* ablation);

#ifdef __cplusplus
}
#endif

#endif /* CCL_CCL_H_ */
