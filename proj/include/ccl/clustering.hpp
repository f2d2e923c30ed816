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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccl/autodiff.hpp"

namespace ccl::clustering {

// Which representation is clustered: encoder output h or head output z.
enum class Layer { kEmbedding, kProjection };

std::string_view to_string(Layer layer);
Layer parse_layer(std::string_view name);

struct KMeansResult {
  ad::Tensor centers;            // R x d, unit rows
  std::vector<int> assignments;  // one per input point
  std::size_t iterations = 0;
  // sum_i (1 - cos(x_i, c_{a_i})) after every assignment step, ending with
  // the returned state.
  std::vector<double> objective;
};

// Spherical k-means: Lloyd iterations on L2-normalized points with centers
// re-normalized after each mean update, k-means++ seeding from `seed`, and
// empty clusters re-seeded at the point farthest from its center. Stops
// when no center moves by `tol` or more, or after `max_iters` updates.
KMeansResult kmeans_fit(const ad::Tensor& points, std::size_t clusters,
                        std::uint64_t seed, std::size_t max_iters = 100,
                        double tol = 1e-6);

// Same iterations from caller-provided centers.
KMeansResult kmeans_fit_from(const ad::Tensor& points,
                             const ad::Tensor& initial_centers,
                             std::size_t max_iters = 100, double tol = 1e-6);

// Index of the center of maximum cosine similarity; ties go to the lowest
// index.
std::vector<int> assign(const ad::Tensor& points, const ad::Tensor& centers);

// Per-cluster concentration of `points` around their assigned centers.
std::vector<double> compute_concentrations(const ad::Tensor& points,
                                           std::span<const int> assignments,
                                           const ad::Tensor& centers,
                                           double alpha, double phi_floor);

// Mean over points of the largest cosine similarity to any center.
double mean_max_cosine(const ad::Tensor& points, const ad::Tensor& centers);

struct ClusterSchedule {
  std::size_t warmup_epochs = 0;
  std::size_t update_interval = 10;
  // Refit before every batch of the joint phase instead of on interval
  // epochs ("interval 0" ablation row).
  bool per_batch = false;

  void validate() const;
};

// True iff epoch >= W and (epoch - W) mod U == 0. In per-batch mode every
// joint-phase epoch qualifies.
bool should_update(std::size_t epoch, const ClusterSchedule& schedule);

struct ClusterState {
  ad::Tensor centers;            // R x d, unit rows
  std::vector<int> assignments;  // over the full training set
  std::vector<double> phis;      // R values, each >= phi_floor
  Layer layer = Layer::kEmbedding;
  std::int64_t updated_at_epoch = -1;

  std::size_t clusters() const { return centers.rows(); }
};

struct ClusterFitOptions {
  std::size_t clusters = 10;
  double alpha = 10.0;
  double phi_floor = 0.05;
  std::size_t max_iters = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

// Clusters the rows of `features` (normalized first) and computes the
// concentration of each cluster in the normalized geometry.
ClusterState fit_cluster_state(const ad::Tensor& features, Layer layer,
                               std::int64_t epoch,
                               const ClusterFitOptions& options);

}  // namespace ccl::clustering
