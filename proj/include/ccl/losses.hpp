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

// Contrastive losses of the cluster-aware objective.
//
// Rows of every batch are augmented views ordered in pairs: rows 2k and 2k+1
// come from the same source sample. Every similarity is cosine, so each loss
// is invariant to positive rescaling of its rows.

#pragma once

#include <cstddef>
#include <span>

#include "ccl/autodiff.hpp"

namespace ccl::losses {

struct LossHyperparams {
  double tau = 0.5;            // instance temperature (NT-Xent and L_CIL)
  double alpha = 10.0;         // concentration smoothing
  double lambda_weight = 0.5;  // weight of the cluster-aware term
  double phi_floor = 0.05;     // lower clamp on concentrations
  // Conventional InfoNCE form of L_CCL: keep the positive center in the
  // normalizer. Off by default.
  bool denominator_includes_positive = false;

  void validate() const;
};

// l(i, j) = -log( exp(s(z_i, z_j)/tau) / sum_{k != i} exp(s(z_i, z_k)/tau) ).
ad::Tensor nt_xent_pair(std::size_t i, std::size_t j,
                        const ad::Tensor& projections, double tau);

// L_self = (1/2N) sum_k [l(2k, 2k+1) + l(2k+1, 2k)].
ad::Tensor self_supervised_loss(const ad::Tensor& projections, double tau);

// phi = max( sum_t |h_t - c| / (T ln(T + alpha)), phi_floor ).
double concentration(const ad::Tensor& members, std::span<const double> center,
                     double alpha, double phi_floor);

// L_CCL. The normalizer runs over the R-1 centers other than the assigned
// one unless `denominator_includes_positive` is set; negative values are
// therefore possible. Temperatures are per center: logit(i, j) = s(h_i, c_j)/phi_j.
ad::Tensor cluster_center_loss(const ad::Tensor& embeddings,
                               const ad::Tensor& centers,
                               std::span<const int> assignments,
                               std::span<const double> phis,
                               bool denominator_includes_positive = false);

struct InstanceLoss {
  ad::Tensor value;
  std::size_t anchors = 0;  // rows with at least one same-cluster partner
  bool degenerate = false;  // no anchors at all; value is 0
};

// L_CIL (SupCon form). Anchors with no same-cluster partner in the batch
// are skipped and excluded from the mean.
InstanceLoss cluster_instance_loss(const ad::Tensor& embeddings,
                                   std::span<const int> assignments,
                                   double tau);

// (L_CCL + L_CIL) / 2.
ad::Tensor cluster_aware_loss(const ad::Tensor& l_ccl, const ad::Tensor& l_cil);

// (1 - lambda) L_self + lambda L_cluster.
ad::Tensor total_loss(const ad::Tensor& l_self, const ad::Tensor& l_cluster,
                      double lambda_weight);

}  // namespace ccl::losses
