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

#include "ccl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ccl/errors.hpp"

namespace ccl::losses {
namespace {

void require_positive_tau(double tau) {
  if (!(tau > 0.0)) throw ConfigError("temperature tau must be positive");
}

// -sum(log_probs * weights) / count
ad::Tensor weighted_nll(const ad::Tensor& log_probs, std::vector<double> weights,
                        double count) {
  ad::Tensor w(log_probs.shape(), std::move(weights));
  return ad::scale(ad::sum_all(ad::mul(log_probs, w)), -1.0 / count);
}

}  // namespace

void LossHyperparams::validate() const {
  require_positive_tau(tau);
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(lambda_weight >= 0.0 && lambda_weight <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  if (!(phi_floor > 0.0)) throw ConfigError("phi_floor must be positive");
}

ad::Tensor nt_xent_pair(std::size_t i, std::size_t j,
                        const ad::Tensor& projections, double tau) {
  require_positive_tau(tau);
  const std::size_t n = projections.rows();
  if (n < 2) throw ContractError("nt_xent_pair needs at least two rows");
  if (i >= n || j >= n || i == j) {
    throw ContractError("nt_xent_pair: invalid pair (" + std::to_string(i) +
                        ", " + std::to_string(j) + ")");
  }
  ad::Tensor logits =
      ad::scale(ad::cosine_similarity(projections, projections), 1.0 / tau);
  ad::Tensor log_probs =
      ad::masked_log_softmax(logits, ad::Mask::off_diagonal(n));
  std::vector<double> w(n * n, 0.0);
  w[i * n + j] = 1.0;
  return weighted_nll(log_probs, std::move(w), 1.0);
}

ad::Tensor self_supervised_loss(const ad::Tensor& projections, double tau) {
  require_positive_tau(tau);
  const std::size_t n = projections.rows();
  if (n < 2 || n % 2 != 0) {
    throw ContractError("self_supervised_loss needs an even row count >= 2, got " +
                        std::to_string(n));
  }
  ad::Tensor logits =
      ad::scale(ad::cosine_similarity(projections, projections), 1.0 / tau);
  ad::Tensor log_probs =
      ad::masked_log_softmax(logits, ad::Mask::off_diagonal(n));
  std::vector<double> w(n * n, 0.0);
  for (std::size_t k = 0; k < n; k += 2) {
    w[k * n + k + 1] = 1.0;
    w[(k + 1) * n + k] = 1.0;
  }
  return weighted_nll(log_probs, std::move(w), static_cast<double>(n));
}

double concentration(const ad::Tensor& members, std::span<const double> center,
                     double alpha, double phi_floor) {
  const std::size_t t = members.rows();
  if (members.numel() == 0 || t == 0) {
    throw ContractError("concentration of an empty cluster");
  }
  if (members.cols() != center.size()) {
    throw DimensionError("concentration: members have " +
                         std::to_string(members.cols()) +
                         " columns, center has " +
                         std::to_string(center.size()));
  }
  double total = 0.0;
  for (std::size_t r = 0; r < t; ++r) {
    double ss = 0.0;
    for (std::size_t c = 0; c < center.size(); ++c) {
      const double d = members(r, c) - center[c];
      ss += d * d;
    }
    total += std::sqrt(ss);
  }
  const double td = static_cast<double>(t);
  const double phi = total / (td * std::log(td + alpha));
  return std::max(phi, phi_floor);
}

ad::Tensor cluster_center_loss(const ad::Tensor& embeddings,
                               const ad::Tensor& centers,
                               std::span<const int> assignments,
                               std::span<const double> phis,
                               bool denominator_includes_positive) {
  const std::size_t n = embeddings.rows();
  const std::size_t r = centers.rows();
  if (r < 2) {
    throw ConfigError("cluster_center_loss needs at least two centers");
  }
  if (assignments.size() != n) {
    throw DimensionError("cluster_center_loss: " +
                         std::to_string(assignments.size()) +
                         " assignments for " + std::to_string(n) + " rows");
  }
  if (phis.size() != r) {
    throw DimensionError("cluster_center_loss: " + std::to_string(phis.size()) +
                         " concentrations for " + std::to_string(r) +
                         " centers");
  }
  std::vector<double> inv_phi(r);
  for (std::size_t j = 0; j < r; ++j) {
    if (!(phis[j] > 0.0)) {
      throw ContractError("cluster_center_loss: concentration " +
                          std::to_string(j) + " is not positive");
    }
    inv_phi[j] = 1.0 / phis[j];
  }
  ad::Mask mask = ad::Mask::all(n, r);
  std::vector<double> w(n * r, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = assignments[i];
    if (a < 0 || static_cast<std::size_t>(a) >= r) {
      throw ContractError("cluster_center_loss: assignment " +
                          std::to_string(a) + " of row " + std::to_string(i) +
                          " out of range");
    }
    if (!denominator_includes_positive) mask.set(i, static_cast<std::size_t>(a), false);
    w[i * r + static_cast<std::size_t>(a)] = 1.0;
  }
  ad::Tensor logits = ad::mul(ad::cosine_similarity(embeddings, centers),
                              ad::Tensor::matrix(1, r, std::move(inv_phi)));
  ad::Tensor log_probs = ad::masked_log_softmax(logits, mask);
  return weighted_nll(log_probs, std::move(w), static_cast<double>(n));
}

InstanceLoss cluster_instance_loss(const ad::Tensor& embeddings,
                                   std::span<const int> assignments,
                                   double tau) {
  require_positive_tau(tau);
  const std::size_t n = embeddings.rows();
  if (n < 2) throw ContractError("cluster_instance_loss needs at least two rows");
  if (assignments.size() != n) {
    throw DimensionError("cluster_instance_loss: " +
                         std::to_string(assignments.size()) +
                         " assignments for " + std::to_string(n) + " rows");
  }
  std::vector<double> w(n * n, 0.0);
  std::size_t anchors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t positives = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (p != i && assignments[p] == assignments[i]) ++positives;
    }
    if (positives == 0) continue;
    ++anchors;
    const double share = 1.0 / static_cast<double>(positives);
    for (std::size_t p = 0; p < n; ++p) {
      if (p != i && assignments[p] == assignments[i]) w[i * n + p] = share;
    }
  }
  InstanceLoss out;
  out.anchors = anchors;
  if (anchors == 0) {
    out.value = ad::Tensor::scalar(0.0);
    out.degenerate = true;
    return out;
  }
  ad::Tensor logits =
      ad::scale(ad::cosine_similarity(embeddings, embeddings), 1.0 / tau);
  ad::Tensor log_probs =
      ad::masked_log_softmax(logits, ad::Mask::off_diagonal(n));
  out.value = weighted_nll(log_probs, std::move(w), static_cast<double>(anchors));
  return out;
}

ad::Tensor cluster_aware_loss(const ad::Tensor& l_ccl, const ad::Tensor& l_cil) {
  return ad::scale(ad::add(l_ccl, l_cil), 0.5);
}

ad::Tensor total_loss(const ad::Tensor& l_self, const ad::Tensor& l_cluster,
                      double lambda_weight) {
  if (!(lambda_weight >= 0.0 && lambda_weight <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  return ad::add(ad::scale(l_self, 1.0 - lambda_weight),
                 ad::scale(l_cluster, lambda_weight));
}

}  // namespace ccl::losses
