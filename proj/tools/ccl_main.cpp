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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccl/ccl.h"

namespace {

int exit_code(ccl_status s) {
  switch (s) {
    case CCL_OK:
      return 0;
    case CCL_ERR_CONFIG:
      return 2;
    case CCL_ERR_NUMERIC:
      return 3;
    default:
      return 1;
  }
}

// Throws the status out of a subcommand after reporting it.
struct Failure {
  ccl_status status;
};

void check(ccl_status s, const char* what) {
  if (s != CCL_OK) {
    std::fprintf(stderr, "ccl: %s: %s\n", what, ccl_last_error());
    throw Failure{s};
  }
}

template <typename T, void (*Destroy)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Destroy(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Config = Handle<ccl_config, ccl_config_destroy>;
using Dataset = Handle<ccl_dataset, ccl_dataset_destroy>;
using Model = Handle<ccl_model, ccl_model_destroy>;
using Report = Handle<ccl_report, ccl_report_destroy>;
using Ablation = Handle<ccl_ablation, ccl_ablation_destroy>;

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", file, "key = value config file");
    app->add_option("-s,--set", overrides, "override a key: key=value")
        ->take_all();
  }

  // defaults < file < --set flags
  void build(Config& cfg) const {
    check(ccl_config_create(cfg.out()), "config");
    if (!file.empty()) check(ccl_config_load_file(cfg.get(), file.c_str()), "config file");
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "ccl: --set expects key=value, got '%s'\n", kv.c_str());
        throw Failure{CCL_ERR_CONFIG};
      }
      check(ccl_config_set(cfg.get(), kv.substr(0, eq).c_str(),
                           kv.substr(eq + 1).c_str()),
            "--set");
    }
    check(ccl_config_validate(cfg.get()), "config");
  }
};

void load_or_generate(const std::string& dir, const Config& cfg, Dataset& data) {
  if (dir.empty()) {
    check(ccl_dataset_generate(cfg.get(), data.out()), "generate data");
  } else {
    check(ccl_dataset_load(dir.c_str(), data.out()), "load data");
  }
}

void print_progress(const char* variant, uint64_t seed, void*) {
  std::fprintf(stderr, "  %-16s seed %llu\n", variant,
               static_cast<unsigned long long>(seed));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster-aware contrastive learning for unsupervised OOD detection"};
  app.set_version_flag("--version", std::string(ccl_version()));
  app.require_subcommand(1);

  ConfigArgs gen_cfg;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset bundle");
  gen_cfg.add_to(gen);
  gen->add_option("-o,--out", gen_out, "output directory")->required();

  ConfigArgs train_cfg;
  std::string train_data;
  std::string train_out;
  std::string train_metrics;
  auto* tr = app.add_subcommand("train", "train a model and write a checkpoint");
  train_cfg.add_to(tr);
  tr->add_option("-d,--data", train_data, "dataset directory (default: generate from config)");
  tr->add_option("-o,--out", train_out, "checkpoint path")->required();
  tr->add_option("-m,--metrics", train_metrics, "per-epoch metrics CSV");

  std::string eval_ckpt;
  std::string eval_data;
  std::string eval_kind = "var";
  std::size_t eval_k = 10;
  std::string eval_scores;
  std::string eval_summary;
  auto* ev = app.add_subcommand("eval", "score ID test and OOD sets; report AUROC");
  ev->add_option("-k,--checkpoint", eval_ckpt, "checkpoint path")->required();
  ev->add_option("-d,--data", eval_data, "dataset directory")->required();
  ev->add_option("--score", eval_kind, "score function")
      ->check(CLI::IsMember({"cos", "var"}));
  ev->add_option("--top-k", eval_k, "K of the variance score");
  ev->add_option("--scores", eval_scores, "per-sample scores CSV");
  ev->add_option("--summary", eval_summary, "per-OOD-set AUROC CSV");

  std::string ex_ckpt;
  std::string ex_data;
  std::string ex_layer = "embedding";
  std::string ex_out;
  auto* ex = app.add_subcommand("export", "write features of every set as CSV");
  ex->add_option("-k,--checkpoint", ex_ckpt, "checkpoint path")->required();
  ex->add_option("-d,--data", ex_data, "dataset directory")->required();
  ex->add_option("-l,--layer", ex_layer, "embedding or projection");
  ex->add_option("-o,--out", ex_out, "output CSV")->required();

  ConfigArgs ab_cfg;
  std::string ab_sweep;
  std::string ab_out;
  auto* ab = app.add_subcommand("ablate", "run a named ablation sweep");
  ab_cfg.add_to(ab);
  ab->add_option("--sweep", ab_sweep, "table2, table3, table4, table5 or score")
      ->required();
  ab->add_option("-o,--out", ab_out, "summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      Config cfg;
      gen_cfg.build(cfg);
      Dataset data;
      check(ccl_dataset_generate(cfg.get(), data.out()), "generate data");
      check(ccl_dataset_save(data.get(), gen_out.c_str()), "save data");
      for (std::size_t i = 0; i < ccl_dataset_num_sets(data.get()); ++i) {
        const char* name = nullptr;
        std::size_t rows = 0;
        std::size_t dims = 0;
        check(ccl_dataset_set_info(data.get(), i, &name, &rows, &dims), "dataset");
        std::printf("%-12s %6zu x %zu\n", name, rows, dims);
      }
    } else if (*tr) {
      Config cfg;
      train_cfg.build(cfg);
      Dataset data;
      load_or_generate(train_data, cfg, data);
      Model model;
      check(ccl_train(cfg.get(), data.get(),
                      train_metrics.empty() ? nullptr : train_metrics.c_str(),
                      model.out()),
            "train");
      check(ccl_model_save(model.get(), train_out.c_str()), "save checkpoint");
      uint64_t hash = 0;
      check(ccl_model_config_hash(model.get(), &hash), "checkpoint");
      std::printf("checkpoint %s (config %016llx)\n", train_out.c_str(),
                  static_cast<unsigned long long>(hash));
    } else if (*ev) {
      Model model;
      check(ccl_model_load(eval_ckpt.c_str(), model.out()), "load checkpoint");
      Dataset data;
      check(ccl_dataset_load(eval_data.c_str(), data.out()), "load data");
      Report report;
      check(ccl_evaluate(model.get(), data.get(), eval_kind.c_str(), eval_k,
                         report.out()),
            "evaluate");
      check(ccl_report_write(report.get(),
                             eval_scores.empty() ? nullptr : eval_scores.c_str(),
                             eval_summary.empty() ? nullptr : eval_summary.c_str()),
            "write report");
      for (std::size_t i = 0; i < ccl_report_num_ood_sets(report.get()); ++i) {
        const char* name = nullptr;
        double auroc = 0.0;
        check(ccl_report_auroc(report.get(), i, &name, &auroc), "report");
        std::printf("%-12s %s AUROC %.4f\n", name, eval_kind.c_str(), auroc);
      }
    } else if (*ex) {
      Model model;
      check(ccl_model_load(ex_ckpt.c_str(), model.out()), "load checkpoint");
      Dataset data;
      check(ccl_dataset_load(ex_data.c_str(), data.out()), "load data");
      check(ccl_export_features(model.get(), data.get(), ex_layer.c_str(),
                                ex_out.c_str()),
            "export");
    } else if (*ab) {
      Config cfg;
      ab_cfg.build(cfg);
      Ablation result;
      check(ccl_ablate(cfg.get(), ab_sweep.c_str(), print_progress, nullptr,
                       result.out()),
            "ablate");
      if (!ab_out.empty()) check(ccl_ablation_write(result.get(), ab_out.c_str()), "write");
      const std::size_t sets = ccl_ablation_num_ood_sets(result.get());
      for (std::size_t v = 0; v < ccl_ablation_num_variants(result.get()); ++v) {
        for (std::size_t s = 0; s < sets; ++s) {
          const char* variant = nullptr;
          const char* set = nullptr;
          double mean = 0.0;
          check(ccl_ablation_mean_auroc(result.get(), v, s, &variant, &set, &mean),
                "ablation");
          std::printf("%-16s %-12s mean AUROC %.4f\n", variant, set, mean);
        }
      }
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return 0;
}
