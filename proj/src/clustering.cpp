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

#include "ccl/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ccl/errors.hpp"
#include "ccl/losses.hpp"

namespace ccl::clustering {
namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

std::vector<double> normalized(const ad::Tensor& points, const char* what) {
  const std::size_t m = points.rows();
  const std::size_t d = points.cols();
  std::vector<double> out(points.values().begin(), points.values().end());
  for (std::size_t i = 0; i < m; ++i) {
    double* row = &out[i * d];
    const double norm = std::sqrt(dot(row, row, d));
    if (!(norm > 0.0)) {
      throw DomainError(std::string(what) + ": row " + std::to_string(i) +
                        " has zero norm");
    }
    if (!std::isfinite(norm)) {
      throw DomainError(std::string(what) + ": row " + std::to_string(i) +
                        " is not finite");
    }
    for (std::size_t k = 0; k < d; ++k) row[k] /= norm;
  }
  return out;
}

// Index into cumulative `weights` where u * total falls.
std::size_t draw_weighted(const std::vector<double>& weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = u * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (cum > target) return i;
  }
  return weights.size() - 1;
}

struct Lloyd {
  std::size_t m;
  std::size_t d;
  std::size_t r;
  const std::vector<double>& x;  // normalized points, m x d
  std::vector<double> c;         // unit centers, r x d
  std::vector<int> a;

  // Nearest center by cosine; ties to the lowest index.
  void assign_all() {
    a.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < r; ++j) {
        const double s = dot(&x[i * d], &c[j * d], d);
        if (s > best) {
          best = s;
          a[i] = static_cast<int>(j);
        }
      }
    }
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> n(r, 0);
    for (int j : a) ++n[static_cast<std::size_t>(j)];
    return n;
  }

  // Re-seeds every empty cluster at the point farthest from its own center,
  // taken from clusters that keep at least one member. Returns false when no
  // donor exists.
  bool repair_empty() {
    auto n = sizes();
    for (std::size_t e = 0; e < r; ++e) {
      if (n[e] != 0) continue;
      std::size_t far = m;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < m; ++i) {
        const auto j = static_cast<std::size_t>(a[i]);
        if (n[j] < 2) continue;
        const double dist = squared_distance(&x[i * d], &c[j * d], d);
        if (dist > far_dist) {
          far_dist = dist;
          far = i;
        }
      }
      if (far == m) return false;
      --n[static_cast<std::size_t>(a[far])];
      ++n[e];
      a[far] = static_cast<int>(e);
      std::copy_n(&x[far * d], d, &c[e * d]);
    }
    return true;
  }

  double objective() const {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      total += 1.0 - dot(&x[i * d], &c[static_cast<std::size_t>(a[i]) * d], d);
    }
    return total;
  }

  // Normalized member means; a cluster whose mean vanishes keeps its center.
  // Returns the largest center displacement.
  double update() {
    std::vector<double> sum(r * d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = static_cast<std::size_t>(a[i]);
      for (std::size_t k = 0; k < d; ++k) sum[j * d + k] += x[i * d + k];
    }
    double moved = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      double* s = &sum[j * d];
      const double norm = std::sqrt(dot(s, s, d));
      if (!(norm > 0.0)) continue;
      for (std::size_t k = 0; k < d; ++k) s[k] /= norm;
      moved = std::max(moved, std::sqrt(squared_distance(s, &c[j * d], d)));
      std::copy_n(s, d, &c[j * d]);
    }
    return moved;
  }
};

KMeansResult run_lloyd(std::size_t m, std::size_t d, std::size_t r,
                       const std::vector<double>& x, std::vector<double> c,
                       std::size_t max_iters, double tol) {
  Lloyd lloyd{m, d, r, x, std::move(c), {}};
  KMeansResult out;
  for (std::size_t it = 0; it < max_iters; ++it) {
    lloyd.assign_all();
    if (!lloyd.repair_empty()) {
      throw NumericError("k-means: cannot repair an empty cluster");
    }
    out.objective.push_back(lloyd.objective());
    const double moved = lloyd.update();
    out.iterations = it + 1;
    if (moved < tol) break;
  }
  // Final assignment against the returned centers, repaired until every
  // cluster is populated.
  bool populated = false;
  for (std::size_t attempt = 0; attempt <= r && !populated; ++attempt) {
    lloyd.assign_all();
    auto n = lloyd.sizes();
    populated = std::none_of(n.begin(), n.end(),
                             [](std::size_t v) { return v == 0; });
    if (!populated && !lloyd.repair_empty()) break;
  }
  if (!populated) {
    throw NumericError("k-means: empty cluster persists after repair");
  }
  out.objective.push_back(lloyd.objective());
  out.centers = ad::Tensor::matrix(r, d, std::move(lloyd.c));
  out.assignments = std::move(lloyd.a);
  return out;
}

void check_fit_args(const ad::Tensor& points, std::size_t clusters) {
  if (clusters < 2) throw ConfigError("k-means needs at least two clusters");
  if (points.rank() != 2 || points.rows() < clusters) {
    throw ConfigError("k-means: " + std::to_string(points.rows()) +
                      " points for " + std::to_string(clusters) + " clusters");
  }
}

}  // namespace

std::string_view to_string(Layer layer) {
  return layer == Layer::kEmbedding ? "embedding" : "projection";
}

Layer parse_layer(std::string_view name) {
  if (name == "embedding") return Layer::kEmbedding;
  if (name == "projection") return Layer::kProjection;
  throw ConfigError("unknown layer '" + std::string(name) +
                    "' (expected embedding or projection)");
}

KMeansResult kmeans_fit(const ad::Tensor& points, std::size_t clusters,
                        std::uint64_t seed, std::size_t max_iters, double tol) {
  check_fit_args(points, clusters);
  const std::size_t m = points.rows();
  const std::size_t d = points.cols();
  const std::vector<double> x = normalized(points, "kmeans_fit");

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<double> c(clusters * d);
  std::vector<double> nearest(m, std::numeric_limits<double>::infinity());
  std::vector<double> weights(m, 1.0);
  for (std::size_t j = 0; j < clusters; ++j) {
    const std::size_t pick = draw_weighted(weights, uniform01(rng));
    std::copy_n(&x[pick * d], d, &c[j * d]);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(&x[i * d], &c[j * d], d));
      total += nearest[i];
    }
    if (total > 0.0) {
      weights = nearest;
    } else {
      std::fill(weights.begin(), weights.end(), 1.0);
    }
  }
  return run_lloyd(m, d, clusters, x, std::move(c), max_iters, tol);
}

KMeansResult kmeans_fit_from(const ad::Tensor& points,
                             const ad::Tensor& initial_centers,
                             std::size_t max_iters, double tol) {
  const std::size_t r = initial_centers.rows();
  check_fit_args(points, r);
  if (initial_centers.cols() != points.cols()) {
    throw DimensionError("kmeans_fit_from: centers have " +
                         std::to_string(initial_centers.cols()) +
                         " columns, points " + std::to_string(points.cols()));
  }
  const std::vector<double> x = normalized(points, "kmeans_fit_from");
  std::vector<double> c = normalized(initial_centers, "kmeans_fit_from");
  return run_lloyd(points.rows(), points.cols(), r, x, std::move(c), max_iters,
                   tol);
}

std::vector<int> assign(const ad::Tensor& points, const ad::Tensor& centers) {
  if (points.cols() != centers.cols()) {
    throw DimensionError("assign: points have " + std::to_string(points.cols()) +
                         " columns, centers " + std::to_string(centers.cols()));
  }
  if (centers.rows() == 0 || centers.numel() == 0) {
    throw ContractError("assign: no centers");
  }
  const std::size_t d = points.cols();
  const std::vector<double> x = normalized(points, "assign");
  std::vector<double> c = normalized(centers, "assign");
  Lloyd lloyd{points.rows(), d, centers.rows(), x, std::move(c), {}};
  lloyd.assign_all();
  return lloyd.a;
}

std::vector<double> compute_concentrations(const ad::Tensor& points,
                                           std::span<const int> assignments,
                                           const ad::Tensor& centers,
                                           double alpha, double phi_floor) {
  const std::size_t r = centers.rows();
  const std::size_t d = centers.cols();
  if (assignments.size() != points.rows()) {
    throw DimensionError("compute_concentrations: assignment count mismatch");
  }
  if (points.cols() != d) {
    throw DimensionError("compute_concentrations: points have " +
                         std::to_string(points.cols()) + " columns, centers " +
                         std::to_string(d));
  }
  std::vector<std::vector<double>> members(r);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int a = assignments[i];
    if (a < 0 || static_cast<std::size_t>(a) >= r) {
      throw ContractError("compute_concentrations: assignment out of range");
    }
    auto row = points.row(i);
    auto& bucket = members[static_cast<std::size_t>(a)];
    bucket.insert(bucket.end(), row.begin(), row.end());
  }
  std::vector<double> phis(r);
  for (std::size_t j = 0; j < r; ++j) {
    if (members[j].empty()) {
      throw ContractError("compute_concentrations: cluster " +
                          std::to_string(j) + " is empty");
    }
    const std::size_t t = members[j].size() / d;
    auto center = centers.row(j);
    phis[j] = losses::concentration(ad::Tensor::matrix(t, d, std::move(members[j])),
                                    center, alpha, phi_floor);
  }
  return phis;
}

double mean_max_cosine(const ad::Tensor& points, const ad::Tensor& centers) {
  if (points.rows() == 0) throw ContractError("mean_max_cosine: no points");
  ad::Tensor sims = ad::cosine_similarity(points, centers);
  double total = 0.0;
  for (std::size_t i = 0; i < sims.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sims.cols(); ++j) best = std::max(best, sims(i, j));
    total += best;
  }
  return total / static_cast<double>(sims.rows());
}

void ClusterSchedule::validate() const {
  if (update_interval < 1) throw ConfigError("update interval must be >= 1");
}

bool should_update(std::size_t epoch, const ClusterSchedule& schedule) {
  if (epoch < schedule.warmup_epochs) return false;
  if (schedule.per_batch) return true;
  schedule.validate();
  return (epoch - schedule.warmup_epochs) % schedule.update_interval == 0;
}

ClusterState fit_cluster_state(const ad::Tensor& features, Layer layer,
                               std::int64_t epoch,
                               const ClusterFitOptions& options) {
  const ad::Tensor unit = ad::normalize_rows(features.detached());
  KMeansResult km = kmeans_fit(unit, options.clusters, options.seed,
                               options.max_iters, options.tol);
  ClusterState state;
  state.phis = compute_concentrations(unit, km.assignments, km.centers,
                                      options.alpha, options.phi_floor);
  state.centers = std::move(km.centers);
  state.assignments = std::move(km.assignments);
  state.layer = layer;
  state.updated_at_epoch = epoch;
  return state;
}

}  // namespace ccl::clustering
