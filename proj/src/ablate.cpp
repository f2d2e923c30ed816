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

#include "ccl/ablate.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "ccl/checkpoint.hpp"
#include "ccl/data.hpp"
#include "ccl/errors.hpp"
#include "ccl/evaluate.hpp"
#include "ccl/train.hpp"

namespace ccl {
namespace {

AblationVariant variant(std::string name, std::function<void(TrainConfig&)> f) {
  return AblationVariant{std::move(name), std::move(f)};
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double VariantOutcome::mean_auroc(std::size_t set) const {
  std::vector<double> col;
  for (const auto& row : auroc) col.push_back(row.at(set));
  return mean_of(col);
}

double VariantOutcome::mean_similarity() const {
  return mean_of(center_similarity);
}

const VariantOutcome& AblationResult::find(std::string_view name) const {
  for (const auto& v : variants) {
    if (v.variant == name) return v;
  }
  throw ContractError("sweep " + sweep + " has no variant " + std::string(name));
}

const std::vector<std::string>& sweep_names() {
  static const std::vector<std::string> names = {"table2", "table3", "table4",
                                                 "table5", "score"};
  return names;
}

std::vector<AblationVariant> sweep_variants(std::string_view sweep,
                                            const TrainConfig& base) {
  if (sweep == "table2") {
    return {
        variant("self_only", [](TrainConfig& c) { c.use_ccl = c.use_cil = false; }),
        variant("self_ccl", [](TrainConfig& c) { c.use_ccl = true; c.use_cil = false; }),
        variant("self_cil", [](TrainConfig& c) { c.use_ccl = false; c.use_cil = true; }),
        variant("full", [](TrainConfig& c) { c.use_ccl = c.use_cil = true; }),
    };
  }
  if (sweep == "table3") {
    return {
        variant("embedding",
                [](TrainConfig& c) { c.clustering_layer = clustering::Layer::kEmbedding; }),
        variant("projection",
                [](TrainConfig& c) { c.clustering_layer = clustering::Layer::kProjection; }),
    };
  }
  if (sweep == "table4") {
    const std::size_t w = base.warmup_epochs > 0 ? base.warmup_epochs : base.epochs / 2;
    auto with = [w](std::size_t warmup, std::size_t interval, bool per_batch) {
      return [=](TrainConfig& c) {
        c.warmup_epochs = warmup > 0 ? w : 0;
        c.update_interval = interval;
        c.update_per_batch = per_batch;
      };
    };
    return {
        variant("no_warmup_u10", with(0, 10, false)),
        variant("warmup_u10", with(1, 10, false)),
        variant("warmup_batch", with(1, 1, true)),
        variant("warmup_u1", with(1, 1, false)),
        variant("warmup_u50", with(1, 50, false)),
    };
  }
  if (sweep == "table5") {
    const std::size_t c = base.data.components;
    return {
        variant("r_half", [c](TrainConfig& t) { t.clusters = std::max<std::size_t>(2, c / 2); }),
        variant("r_true", [c](TrainConfig& t) { t.clusters = c; }),
        variant("r_5x", [c](TrainConfig& t) { t.clusters = 5 * c; }),
    };
  }
  if (sweep == "score") {
    return {
        variant("cos", [](TrainConfig& c) { c.score_kind = scoring::ScoreKind::kCos; }),
        variant("var", [](TrainConfig& c) { c.score_kind = scoring::ScoreKind::kVar; }),
    };
  }
  throw ConfigError("unknown sweep '" + std::string(sweep) +
                    "' (expected table2, table3, table4, table5 or score)");
}

AblationResult run_ablation(const TrainConfig& base, std::string_view sweep,
                            const AblationProgress& progress) {
  base.validate();
  auto variants = sweep_variants(sweep, base);
  AblationResult result;
  result.sweep = std::string(sweep);
  for (const auto& v : variants) result.variants.push_back({v.name, {}, {}, {}});

  // Trained models keyed by config hash; the score sweep's variants differ
  // only in the score function and share one model per seed.
  for (std::size_t s = 0; s < base.ablate_seeds; ++s) {
    const std::size_t seed = base.seed + s;
    result.seeds.push_back(seed);
    TrainConfig seeded = base;
    seeded.seed = seed;
    const DatasetBundle bundle = generate_synthetic(seeded.data, seed);
    std::map<std::uint64_t, TrainResult> trained;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      TrainConfig cfg = seeded;
      variants[i].apply(cfg);
      if (progress) progress(variants[i].name, seed);
      TrainConfig train_key = cfg;
      train_key.score_kind = seeded.score_kind;
      auto it = trained.find(train_key.hash());
      if (it == trained.end()) {
        it = trained.emplace(train_key.hash(), train(cfg, bundle)).first;
      }
      const TrainResult& tr = it->second;
      Checkpoint ck{cfg, tr.params, tr.clusters};
      const auto report = evaluate(ck, bundle, cfg.score_kind, cfg.k_top);
      auto& out = result.variants[i];
      if (out.ood_sets.empty()) {
        for (const auto& o : report.ood) out.ood_sets.push_back(o.name);
      }
      out.auroc.push_back(report.auroc);
      if (tr.clusters) {
        out.center_similarity.push_back(clustering::mean_max_cosine(
            features(tr.params, bundle.id_test.samples, cfg.clustering_layer),
            tr.clusters->centers));
      }
    }
  }
  return result;
}

void write_ablation_csv(const AblationResult& result,
                        const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.precision(17);
  os << "variant,ood_set,mean_auroc,std_auroc,mean_center_similarity";
  for (auto seed : result.seeds) os << ",auroc_seed" << seed;
  os << '\n';
  for (const auto& v : result.variants) {
    for (std::size_t set = 0; set < v.ood_sets.size(); ++set) {
      const double mean = v.mean_auroc(set);
      double var = 0.0;
      for (const auto& row : v.auroc) var += (row[set] - mean) * (row[set] - mean);
      const double sd =
          v.auroc.size() > 1 ? std::sqrt(var / static_cast<double>(v.auroc.size() - 1)) : 0.0;
      os << v.variant << ',' << v.ood_sets[set] << ',' << mean << ',' << sd << ',';
      if (!v.center_similarity.empty()) os << v.mean_similarity();
      for (const auto& row : v.auroc) os << ',' << row[set];
      os << '\n';
    }
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace ccl
