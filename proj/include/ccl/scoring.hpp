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

// OOD score functions over a bank of training-set features, and AUROC.
// Higher score means more in-distribution.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccl/autodiff.hpp"

namespace ccl::scoring {

enum class ScoreKind { kCos, kVar };

std::string_view to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view name);

// Training-set features with cached row norms.
class ReferenceBank {
 public:
  explicit ReferenceBank(ad::Tensor features);

  const ad::Tensor& features() const { return features_; }
  std::span<const double> norms() const { return norms_; }
  std::size_t size() const { return features_.rows(); }
  std::size_t dim() const { return features_.cols(); }

 private:
  ad::Tensor features_;
  std::vector<double> norms_;
};

// max_m s(f_m, z) |f_m|.
double score_cos(const ReferenceBank& bank, std::span<const double> z);

struct VarScore {
  double value = 0.0;        // cos_score / denominator
  double cos_score = 0.0;
  double denominator = 0.0;  // std-dev of the top-K rows, clamped to 1e-8
  bool degenerate = false;   // the clamp was applied
};

inline constexpr double kMinDenominator = 1e-8;

// score_cos divided by sqrt( sum_{v in V} |f_v - mean_V|^2 / (K - 1) ), V the
// K bank rows with the highest per-row score s(f_m, z) |f_m| (ties by lower
// index).
VarScore score_var(const ReferenceBank& bank, std::span<const double> z,
                   std::size_t k_top);

// P(id > ood) + P(id == ood) / 2, via midranks.
double auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores);

struct SetScores {
  std::string name;
  std::vector<double> scores;
  std::vector<double> denominators;  // filled for kVar only
};

struct ScoreReport {
  ScoreKind kind = ScoreKind::kCos;
  std::size_t k_top = 10;
  SetScores id;
  std::vector<SetScores> ood;
  std::vector<double> auroc;  // parallel to `ood`
};

struct NamedFeatures {
  std::string name;
  ad::Tensor features;
};

ScoreReport score_sets(const ReferenceBank& bank, const NamedFeatures& id_set,
                       const std::vector<NamedFeatures>& ood_sets,
                       ScoreKind kind, std::size_t k_top);

// One row per test sample: set,sample_id,score.
void write_scores_csv(const ScoreReport& report,
                      const std::filesystem::path& path);
// One row per OOD set: ood_set,score_kind,k,auroc.
void write_summary_csv(const ScoreReport& report,
                       const std::filesystem::path& path);

}  // namespace ccl::scoring
