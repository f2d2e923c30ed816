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

// Experiment configuration. Files are flat `key = value` text with `#`
// comments; later assignments override earlier ones.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ccl/clustering.hpp"
#include "ccl/losses.hpp"
#include "ccl/model.hpp"
#include "ccl/scoring.hpp"

namespace ccl {

struct DatasetSpec {
  std::size_t dims = 16;
  std::size_t components = 4;
  std::size_t train_per_component = 100;
  std::size_t test_per_component = 50;
  std::size_t ood_per_set = 200;
  double component_spread = 0.2;    // per-coordinate std-dev around each mean
  double shift_angle_deg = 40.0;    // rotation of the shifted OOD means
  double scaled_covariance = 3.0;   // covariance multiplier of the scaled set
  double interp_noise = 0.02;       // std-dev added to interpolated midpoints

  void validate() const;
};

struct AugmentOptions {
  double noise = 0.1;      // additive Gaussian std-dev
  double mask_prob = 0.2;  // per-coordinate zeroing probability
  double gain_min = 0.8;   // per-view positive gain range
  double gain_max = 1.2;

  void validate() const;
};

struct TrainConfig {
  std::uint64_t seed = 1;
  DatasetSpec data;
  AugmentOptions augment;

  // Hidden widths then the embedding width; the input width is data.dims.
  std::vector<std::size_t> encoder_widths{64, 64, 32};
  // Hidden width then the projection width; the input width is d_h.
  std::vector<std::size_t> projection_widths{32, 16};

  std::size_t batch_size = 32;
  std::size_t epochs = 400;
  std::size_t warmup_epochs = 200;
  std::size_t update_interval = 10;
  bool update_per_batch = false;
  double learning_rate = 0.05;
  bool cosine_annealing = true;

  std::size_t clusters = 0;  // 0 selects data.components
  losses::LossHyperparams loss;
  clustering::Layer clustering_layer = clustering::Layer::kEmbedding;
  bool use_ccl = true;
  bool use_cil = true;
  std::size_t kmeans_max_iters = 100;
  double kmeans_tol = 1e-6;

  scoring::ScoreKind score_kind = scoring::ScoreKind::kVar;
  std::size_t k_top = 10;
  clustering::Layer score_layer = clustering::Layer::kProjection;
  std::size_t probe_interval = 0;  // 0 disables the per-epoch AUROC probe

  std::size_t ablate_seeds = 5;

  void validate() const;

  std::size_t resolved_clusters() const {
    return clusters == 0 ? data.components : clusters;
  }
  model::ModelWidths model_widths() const;
  clustering::ClusterSchedule schedule() const;
  bool cluster_loss_enabled() const {
    return (use_ccl || use_cil) && loss.lambda_weight > 0.0;
  }

  // Sets one key from its textual value. Unknown keys and unparsable values
  // raise ConfigError.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  // Applies `key = value` lines.
  void merge_text(std::string_view text);
  void merge_file(const std::filesystem::path& path);

  // Every key in a fixed order, one `key = value` per line.
  std::string canonical_text() const;
  // FNV-1a 64 of canonical_text().
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

std::string hex64(std::uint64_t value);

}  // namespace ccl
