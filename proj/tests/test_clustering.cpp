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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "ccl/autodiff.hpp"
#include "ccl/clustering.hpp"
#include "ccl/errors.hpp"
#include "oracles.hpp"

namespace ccl::clustering {
namespace {

using ad::Tensor;

// Tight clusters of `per` points around `r` random unit directions in d dims.
oracle::Rows blobs(std::uint64_t seed, std::size_t r, std::size_t per, std::size_t d,
                   double spread) {
  std::mt19937_64 rng(seed);
  const oracle::Rows dirs = oracle::random_rows(rng, r, d);
  std::normal_distribution<double> noise(0.0, spread);
  oracle::Rows out;
  for (std::size_t i = 0; i < r * per; ++i) {
    oracle::Row p = dirs[i % r];
    const double n = oracle::norm(p);
    for (double& v : p) v = v / n + noise(rng);
    out.push_back(p);
  }
  return out;
}

TEST(KMeans, FixedPointWhenSeededAtPoints) {
  const Tensor points = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const KMeansResult res = kmeans_fit_from(points, points);
  EXPECT_EQ(res.assignments, (std::vector<int>{0, 1, 2}));
  for (std::size_t i = 0; i < points.numel(); ++i) {
    EXPECT_EQ(res.centers.values()[i], points.values()[i]);
  }
}

TEST(KMeans, TwoSeparatedBlobsArePure) {
  oracle::Rows pts;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (int i = 0; i < 20; ++i) {
    if (i % 2 == 0) {
      pts.push_back({1.0 + jitter(rng), 0.1 + jitter(rng)});
    } else {
      pts.push_back({-0.1 + jitter(rng), 1.0 + jitter(rng)});
    }
  }
  const KMeansResult res = kmeans_fit(oracle::to_tensor(pts), 2, 11);
  for (std::size_t i = 2; i < pts.size(); ++i) {
    EXPECT_EQ(res.assignments[i], res.assignments[i % 2]);
  }
  EXPECT_NE(res.assignments[0], res.assignments[1]);
  // Each unit center lies inside the angular hull of its blob.
  for (int blob = 0; blob < 2; ++blob) {
    double lo = 10.0;
    double hi = -10.0;
    for (std::size_t i = static_cast<std::size_t>(blob); i < pts.size(); i += 2) {
      const double a = std::atan2(pts[i][1], pts[i][0]);
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    const auto c = static_cast<std::size_t>(res.assignments[static_cast<std::size_t>(blob)]);
    const double ac = std::atan2(res.centers(c, 1), res.centers(c, 0));
    EXPECT_GE(ac, lo);
    EXPECT_LE(ac, hi);
  }
}

TEST(KMeans, DuplicatedDatasetGivesSameCenters) {
  const oracle::Rows pts = blobs(4, 3, 10, 5, 0.2);
  oracle::Rows doubled;
  for (const auto& p : pts) {
    doubled.push_back(p);
    doubled.push_back(p);
  }
  const KMeansResult a = kmeans_fit(oracle::to_tensor(pts), 3, 17);
  const KMeansResult b = kmeans_fit(oracle::to_tensor(doubled), 3, 17);
  for (std::size_t i = 0; i < a.centers.numel(); ++i) {
    EXPECT_NEAR(a.centers.values()[i], b.centers.values()[i], 1e-12);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(a.assignments[i], b.assignments[2 * i]);
  }
}

TEST(KMeans, TooFewPointsIsConfigError) {
  EXPECT_THROW(kmeans_fit(Tensor::matrix(2, 2, {1, 0, 0, 1}), 3, 1), ConfigError);
  EXPECT_THROW(kmeans_fit(Tensor::matrix(2, 2, {1, 0, 0, 1}), 1, 1), ConfigError);
}

TEST(KMeans, DeterministicGivenSeed) {
  const Tensor pts = oracle::to_tensor(blobs(5, 4, 25, 6, 0.4));
  const KMeansResult a = kmeans_fit(pts, 4, 9);
  const KMeansResult b = kmeans_fit(pts, 4, 9);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_TRUE(std::equal(a.centers.values().begin(), a.centers.values().end(),
                         b.centers.values().begin()));
}

TEST(KMeans, ObjectiveNeverIncreases) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Tensor pts = oracle::to_tensor(blobs(s, 4, 20, 5, 0.8));
    const KMeansResult res = kmeans_fit(pts, 3 + s % 3, s);
    ASSERT_FALSE(res.objective.empty());
    for (std::size_t i = 1; i < res.objective.size(); ++i) {
      EXPECT_LE(res.objective[i], res.objective[i - 1] + 1e-12) << "seed " << s;
    }
  }
}

TEST(KMeans, CentersAreUnitAndNoClusterIsEmpty) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Tensor pts = oracle::to_tensor(blobs(s, 2, 15, 4, 0.1));
    const std::size_t r = 5;
    const KMeansResult res = kmeans_fit(pts, r, s);
    std::set<int> used(res.assignments.begin(), res.assignments.end());
    EXPECT_EQ(used.size(), r);
    for (std::size_t j = 0; j < r; ++j) {
      EXPECT_NEAR(oracle::norm(res.centers.row(j)), 1.0, 1e-12);
    }
    EXPECT_EQ(res.assignments, assign(pts, res.centers));
  }
}

TEST(Assign, PointOnCenter) {
  const Tensor centers = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  EXPECT_EQ(assign(Tensor::matrix(1, 3, {0, 0, 2}), centers), std::vector<int>{2});
}

TEST(Assign, TiesGoToLowestIndex) {
  const Tensor centers = Tensor::matrix(2, 2, {1, 0, 0, 1});
  EXPECT_EQ(assign(Tensor::matrix(1, 2, {1, 1}), centers), std::vector<int>{0});
}

TEST(Assign, ZeroPointIsDomainError) {
  const Tensor centers = Tensor::matrix(2, 2, {1, 0, 0, 1});
  EXPECT_THROW(assign(Tensor::matrix(1, 2, {0, 0}), centers), DomainError);
}

TEST(Assign, MatchesArgmaxOracle) {
  for (std::uint64_t s = 0; s < 120; ++s) {
    std::mt19937_64 rng(s);
    const oracle::Rows pts = oracle::random_rows(rng, 12, 4);
    const oracle::Rows c = oracle::random_rows(rng, 2 + s % 3, 4);
    EXPECT_EQ(assign(oracle::to_tensor(pts), oracle::to_tensor(c)), oracle::assign(pts, c));
  }
}

TEST(Concentrations, Examples) {
  const Tensor at_center = Tensor::matrix(3, 2, {1, 0, 1, 0, 1, 0});
  const std::vector<int> zeros{0, 0, 0};
  EXPECT_EQ(compute_concentrations(at_center, zeros, Tensor::matrix(1, 2, {1, 0}), 10, 0.05),
            std::vector<double>{0.05});

  const Tensor unit = Tensor::matrix(4, 2, {1, 0, -1, 0, 0, 1, 0, -1});
  const std::vector<int> four{0, 0, 0, 0};
  EXPECT_NEAR(compute_concentrations(unit, four, Tensor::matrix(1, 2, {0, 0}), 10, 0.0)[0],
              1.0 / std::log(14.0), 1e-15);

  const Tensor twin = Tensor::matrix(4, 2, {1, 0.2, 1, -0.2, 0.2, 1, -0.2, 1});
  const std::vector<int> split{0, 0, 1, 1};
  const auto phis = compute_concentrations(twin, split, Tensor::matrix(2, 2, {1, 0, 0, 1}), 10, 0.0);
  EXPECT_NEAR(phis[0], phis[1], 1e-15);
}

TEST(Concentrations, EmptyClusterIsContractError) {
  const Tensor pts = Tensor::matrix(2, 2, {1, 0, 1, 0.1});
  const std::vector<int> a{0, 0};
  EXPECT_THROW(compute_concentrations(pts, a, Tensor::matrix(2, 2, {1, 0, 0, 1}), 10, 0.05),
               ContractError);
}

TEST(Schedule, Examples) {
  const ClusterSchedule s{1000, 10, false};
  EXPECT_FALSE(should_update(999, s));
  EXPECT_TRUE(should_update(1000, s));
  EXPECT_FALSE(should_update(1015, s));
  EXPECT_TRUE(should_update(1020, s));
}

TEST(Schedule, ZeroIntervalIsConfigError) {
  const ClusterSchedule s{5, 0, false};
  EXPECT_THROW(should_update(7, s), ConfigError);
}

TEST(Layer, ParseRoundTrip) {
  EXPECT_EQ(parse_layer("embedding"), Layer::kEmbedding);
  EXPECT_EQ(parse_layer(to_string(Layer::kProjection)), Layer::kProjection);
  EXPECT_THROW(parse_layer("logits"), ConfigError);
}

TEST(ClusterState, FitSatisfiesInvariants) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor feats = ad::scale(oracle::to_tensor(blobs(s, 3, 30, 6, 0.3)), 4.0);
    ClusterFitOptions opts;
    opts.clusters = 3 + s % 4;
    opts.seed = s;
    const ClusterState st = fit_cluster_state(feats, Layer::kProjection, 12, opts);
    EXPECT_EQ(st.clusters(), opts.clusters);
    EXPECT_EQ(st.assignments.size(), feats.rows());
    EXPECT_EQ(st.layer, Layer::kProjection);
    EXPECT_EQ(st.updated_at_epoch, 12);
    std::set<int> used(st.assignments.begin(), st.assignments.end());
    EXPECT_EQ(used.size(), opts.clusters);
    for (double phi : st.phis) EXPECT_GE(phi, opts.phi_floor);
  }
}

TEST(ClusterState, MeanMaxCosine) {
  const Tensor pts = Tensor::matrix(2, 2, {1, 0, 1, 1});
  const Tensor centers = Tensor::matrix(2, 2, {1, 0, -1, 0});
  EXPECT_NEAR(mean_max_cosine(pts, centers), (1.0 + 1.0 / std::sqrt(2.0)) / 2.0, 1e-15);
}

}  // namespace
}  // namespace ccl::clustering
