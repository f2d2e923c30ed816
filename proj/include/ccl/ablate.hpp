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

// Named ablation sweeps. Each variant is a config edit applied on top of a
// base config; every variant is trained and evaluated once per seed on a
// dataset regenerated from that seed.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ccl/config.hpp"

namespace ccl {

struct AblationVariant {
  std::string name;
  std::function<void(TrainConfig&)> apply;
};

struct VariantOutcome {
  std::string variant;
  std::vector<std::string> ood_sets;
  // auroc[seed][set]
  std::vector<std::vector<double>> auroc;
  // Mean max-cosine similarity between id_test features at the clustering
  // layer and the final centers, per seed. Empty when no centers exist.
  std::vector<double> center_similarity;

  double mean_auroc(std::size_t set) const;
  double mean_similarity() const;
};

struct AblationResult {
  std::string sweep;
  std::vector<std::size_t> seeds;
  std::vector<VariantOutcome> variants;

  const VariantOutcome& find(std::string_view variant) const;
};

// table2: self_only, self_ccl, self_cil, full
// table3: embedding, projection
// table4: no_warmup_u10, warmup_u10, warmup_batch, warmup_u1, warmup_u50
// table5: r_half, r_true, r_5x (R = C/2, C, 5C)
// score:  cos, var (one trained model per seed, two score functions)
std::vector<AblationVariant> sweep_variants(std::string_view sweep,
                                            const TrainConfig& base);
const std::vector<std::string>& sweep_names();

using AblationProgress = std::function<void(const std::string& variant,
                                            std::size_t seed)>;

// Seeds are base.seed, base.seed + 1, ... (base.ablate_seeds of them).
AblationResult run_ablation(const TrainConfig& base, std::string_view sweep,
                            const AblationProgress& progress = {});

// variant,ood_set,mean_auroc,std_auroc,mean_center_similarity,auroc_seed...
void write_ablation_csv(const AblationResult& result,
                        const std::filesystem::path& path);

}  // namespace ccl
