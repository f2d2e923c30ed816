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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ccl/clustering.hpp"
#include "ccl/config.hpp"
#include "ccl/data.hpp"
#include "ccl/model.hpp"

namespace ccl {

struct EpochMetrics {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double loss_self = 0.0;
  // NaN while the cluster-aware term is not evaluated (warm-up, or disabled).
  double loss_cluster = std::numeric_limits<double>::quiet_NaN();
  double loss_total = 0.0;
  bool refit = false;
  double probe_auroc = std::numeric_limits<double>::quiet_NaN();
};

// Hooks for tests and progress reporting. Called between optimizer steps.
class TrainObserver {
 public:
  virtual ~TrainObserver() = default;
  virtual void on_refit(std::size_t /*epoch*/,
                        const clustering::ClusterState& /*state*/) {}
  virtual void on_epoch_end(const EpochMetrics& /*metrics*/,
                            const model::ModelParams& /*params*/) {}
};

struct TrainResult {
  TrainConfig config;
  model::ModelParams params;
  std::optional<clustering::ClusterState> clusters;
  std::vector<EpochMetrics> metrics;
  std::vector<std::size_t> refit_epochs;
};

// Warm-up epochs minimize L_self alone. From epoch W on, each batch adds the
// cluster-aware term on the configured layer using the current centers,
// combined with weight lambda. Centers are refit on the un-augmented training
// set whenever clustering::should_update fires (or before every joint-phase
// batch in per-batch mode). Plain SGD; cosine-annealed rate when enabled.
TrainResult train(const TrainConfig& config, const DatasetBundle& bundle,
                  TrainObserver* observer = nullptr);

// Untracked features of `samples` at `layer`.
ad::Tensor features(const model::ModelParams& params, const ad::Tensor& samples,
                    clustering::Layer layer);

// config_hash,epoch,lr,loss_self,loss_cluster,loss_total,refit,probe_auroc
void write_metrics_csv(const TrainResult& result,
                       const std::filesystem::path& path);

// Learning rate of `epoch` under the configured schedule.
double learning_rate_at(const TrainConfig& config, std::size_t epoch);

}  // namespace ccl
