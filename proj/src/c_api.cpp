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

#include "ccl/ccl.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "ccl/ablate.hpp"
#include "ccl/checkpoint.hpp"
#include "ccl/config.hpp"
#include "ccl/data.hpp"
#include "ccl/errors.hpp"
#include "ccl/evaluate.hpp"
#include "ccl/train.hpp"

struct ccl_config {
  ccl::TrainConfig config;
};

struct ccl_dataset {
  ccl::DatasetBundle bundle;
};

struct ccl_model {
  ccl::Checkpoint checkpoint;
  std::vector<std::size_t> refit_epochs;
};

struct ccl_report {
  ccl::scoring::ScoreReport report;
};

struct ccl_ablation {
  ccl::AblationResult result;
};

namespace {

thread_local std::string g_last_error;

ccl_status fail(ccl_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
ccl_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return CCL_OK;
  } catch (const ccl::ConfigError& e) {
    return fail(CCL_ERR_CONFIG, e.what());
  } catch (const ccl::DimensionError& e) {
    return fail(CCL_ERR_CONFIG, e.what());
  } catch (const ccl::NumericError& e) {
    return fail(CCL_ERR_NUMERIC, e.what());
  } catch (const ccl::DomainError& e) {
    return fail(CCL_ERR_NUMERIC, e.what());
  } catch (const ccl::IoError& e) {
    return fail(CCL_ERR_IO, e.what());
  } catch (const ccl::ContractError& e) {
    return fail(CCL_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CCL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CCL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CCL_ERR_INTERNAL, "unknown error");
  }
}

#define CCL_REQUIRE(cond)                                          \
  do {                                                             \
    if (!(cond)) return fail(CCL_ERR_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* ccl_version(void) { return "1.0.0"; }

const char* ccl_last_error(void) { return g_last_error.c_str(); }

ccl_status ccl_config_create(ccl_config** out) {
  CCL_REQUIRE(out);
  return guarded([&] { *out = new ccl_config(); });
}

void ccl_config_destroy(ccl_config* config) { delete config; }

ccl_status ccl_config_load_file(ccl_config* config, const char* path) {
  CCL_REQUIRE(config && path);
  return guarded([&] { config->config.merge_file(path); });
}

ccl_status ccl_config_set(ccl_config* config, const char* key,
                          const char* value) {
  CCL_REQUIRE(config && key && value);
  return guarded([&] { config->config.set(key, value); });
}

ccl_status ccl_config_get(const ccl_config* config, const char* key, char* buf,
                          size_t buflen, size_t* needed) {
  CCL_REQUIRE(config && key);
  return guarded([&] {
    const std::string v = config->config.get(key);
    if (needed) *needed = v.size();
    if (buf != nullptr && buflen > 0) {
      const std::size_t n = std::min(v.size(), buflen - 1);
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

ccl_status ccl_config_validate(const ccl_config* config) {
  CCL_REQUIRE(config);
  return guarded([&] { config->config.validate(); });
}

ccl_status ccl_config_hash(const ccl_config* config, uint64_t* out) {
  CCL_REQUIRE(config && out);
  return guarded([&] { *out = config->config.hash(); });
}

ccl_status ccl_dataset_generate(const ccl_config* config, ccl_dataset** out) {
  CCL_REQUIRE(config && out);
  return guarded([&] {
    *out = new ccl_dataset{
        ccl::generate_synthetic(config->config.data, config->config.seed)};
  });
}

ccl_status ccl_dataset_load(const char* dir, ccl_dataset** out) {
  CCL_REQUIRE(dir && out);
  return guarded([&] { *out = new ccl_dataset{ccl::load_bundle(dir)}; });
}

ccl_status ccl_dataset_save(const ccl_dataset* dataset, const char* dir) {
  CCL_REQUIRE(dataset && dir);
  return guarded([&] { ccl::save_bundle(dataset->bundle, dir); });
}

void ccl_dataset_destroy(ccl_dataset* dataset) { delete dataset; }

size_t ccl_dataset_num_sets(const ccl_dataset* dataset) {
  return dataset ? dataset->bundle.all_sets().size() : 0;
}

ccl_status ccl_dataset_set_info(const ccl_dataset* dataset, size_t index,
                                const char** name, size_t* rows, size_t* dims) {
  CCL_REQUIRE(dataset);
  const auto sets = dataset->bundle.all_sets();
  if (index >= sets.size()) return fail(CCL_ERR_ARGUMENT, "set index out of range");
  if (name) *name = sets[index]->name.c_str();
  if (rows) *rows = sets[index]->samples.rows();
  if (dims) *dims = sets[index]->samples.cols();
  return CCL_OK;
}

ccl_status ccl_train(const ccl_config* config, const ccl_dataset* dataset,
                     const char* metrics_csv, ccl_model** out) {
  CCL_REQUIRE(config && dataset && out);
  return guarded([&] {
    ccl::TrainResult r = ccl::train(config->config, dataset->bundle);
    if (metrics_csv != nullptr) ccl::write_metrics_csv(r, metrics_csv);
    *out = new ccl_model{
        ccl::Checkpoint{std::move(r.config), std::move(r.params), std::move(r.clusters)},
        std::move(r.refit_epochs)};
  });
}

ccl_status ccl_model_save(const ccl_model* model, const char* path) {
  CCL_REQUIRE(model && path);
  return guarded([&] { ccl::save_checkpoint(model->checkpoint, path); });
}

ccl_status ccl_model_load(const char* path, ccl_model** out) {
  CCL_REQUIRE(path && out);
  return guarded([&] { *out = new ccl_model{ccl::load_checkpoint(path), {}}; });
}

void ccl_model_destroy(ccl_model* model) { delete model; }

ccl_status ccl_model_config_hash(const ccl_model* model, uint64_t* out) {
  CCL_REQUIRE(model && out);
  return guarded([&] { *out = model->checkpoint.config.hash(); });
}

size_t ccl_model_refit_epochs(const ccl_model* model, size_t* epochs, size_t cap) {
  if (model == nullptr) return 0;
  const auto& e = model->refit_epochs;
  for (std::size_t i = 0; i < e.size() && i < cap && epochs != nullptr; ++i) {
    epochs[i] = e[i];
  }
  return e.size();
}

ccl_status ccl_evaluate(const ccl_model* model, const ccl_dataset* dataset,
                        const char* score_kind, size_t k_top, ccl_report** out) {
  CCL_REQUIRE(model && dataset && score_kind && out);
  return guarded([&] {
    *out = new ccl_report{ccl::evaluate(model->checkpoint, dataset->bundle,
                                        ccl::scoring::parse_score_kind(score_kind),
                                        k_top)};
  });
}

ccl_status ccl_report_write(const ccl_report* report, const char* scores_csv,
                            const char* summary_csv) {
  CCL_REQUIRE(report);
  return guarded([&] {
    if (scores_csv) ccl::scoring::write_scores_csv(report->report, scores_csv);
    if (summary_csv) ccl::scoring::write_summary_csv(report->report, summary_csv);
  });
}

size_t ccl_report_num_ood_sets(const ccl_report* report) {
  return report ? report->report.ood.size() : 0;
}

ccl_status ccl_report_auroc(const ccl_report* report, size_t index,
                            const char** name, double* auroc) {
  CCL_REQUIRE(report);
  if (index >= report->report.ood.size()) {
    return fail(CCL_ERR_ARGUMENT, "OOD set index out of range");
  }
  if (name) *name = report->report.ood[index].name.c_str();
  if (auroc) *auroc = report->report.auroc[index];
  return CCL_OK;
}

void ccl_report_destroy(ccl_report* report) { delete report; }

ccl_status ccl_export_features(const ccl_model* model, const ccl_dataset* dataset,
                               const char* layer, const char* path) {
  CCL_REQUIRE(model && dataset && layer && path);
  return guarded([&] {
    ccl::export_embeddings(model->checkpoint, dataset->bundle,
                           ccl::clustering::parse_layer(layer), path);
  });
}

ccl_status ccl_ablate(const ccl_config* config, const char* sweep,
                      ccl_progress_fn progress, void* user, ccl_ablation** out) {
  CCL_REQUIRE(config && sweep && out);
  return guarded([&] {
    ccl::AblationProgress cb;
    if (progress != nullptr) {
      cb = [progress, user](const std::string& v, std::size_t seed) {
        progress(v.c_str(), seed, user);
      };
    }
    *out = new ccl_ablation{ccl::run_ablation(config->config, sweep, cb)};
  });
}

ccl_status ccl_ablation_write(const ccl_ablation* ablation, const char* path) {
  CCL_REQUIRE(ablation && path);
  return guarded([&] { ccl::write_ablation_csv(ablation->result, path); });
}

size_t ccl_ablation_num_variants(const ccl_ablation* ablation) {
  return ablation ? ablation->result.variants.size() : 0;
}

size_t ccl_ablation_num_ood_sets(const ccl_ablation* ablation) {
  if (ablation == nullptr || ablation->result.variants.empty()) return 0;
  return ablation->result.variants.front().ood_sets.size();
}

ccl_status ccl_ablation_mean_auroc(const ccl_ablation* ablation, size_t v,
                                   size_t s, const char** variant,
                                   const char** ood_set, double* mean) {
  CCL_REQUIRE(ablation);
  const auto& vs = ablation->result.variants;
  if (v >= vs.size() || s >= vs[v].ood_sets.size()) {
    return fail(CCL_ERR_ARGUMENT, "ablation index out of range");
  }
  if (variant) *variant = vs[v].variant.c_str();
  if (ood_set) *ood_set = vs[v].ood_sets[s].c_str();
  if (mean) *mean = vs[v].mean_auroc(s);
  return CCL_OK;
}

void ccl_ablation_destroy(ccl_ablation* ablation) { delete ablation; }

}  // extern "C"
