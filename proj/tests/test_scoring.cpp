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
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "ccl/autodiff.hpp"
#include "ccl/errors.hpp"
#include "ccl/scoring.hpp"
#include "oracles.hpp"

namespace ccl::scoring {
namespace {

using ad::Tensor;

TEST(ScoreCos, MatchingUnitRow) {
  const ReferenceBank bank(Tensor::matrix(3, 3, {1, 0, 0, 0, 7, 0, 0, 0, 9}));
  const std::vector<double> z{1, 0, 0};
  EXPECT_NEAR(score_cos(bank, z), 1.0, 1e-15);
}

TEST(ScoreCos, OrthogonalIsZero) {
  const ReferenceBank bank(Tensor::matrix(1, 2, {2, 0}));
  const std::vector<double> z{0, 1};
  EXPECT_EQ(score_cos(bank, z), 0.0);
}

TEST(ScoreCos, EmptyBankIsContractError) {
  EXPECT_THROW(ReferenceBank(Tensor::zeros({0, 3})), ContractError);
}

TEST(ScoreCos, MatchesMaxLoop) {
  for (std::uint64_t s = 0; s < 120; ++s) {
    std::mt19937_64 rng(s);
    const oracle::Rows bank = oracle::random_rows(rng, 20, 8);
    const oracle::Row z = oracle::random_rows(rng, 1, 8)[0];
    EXPECT_NEAR(score_cos(ReferenceBank(oracle::to_tensor(bank)), z),
                oracle::score_cos(bank, z), 1e-10);
  }
}

TEST(ScoreVar, IdenticalTopRowsAreDegenerate) {
  const ReferenceBank bank(Tensor::matrix(3, 2, {1, 0, 1, 0, -1, 0}));
  const std::vector<double> z{1, 0};
  const VarScore v = score_var(bank, z, 2);
  EXPECT_TRUE(v.degenerate);
  EXPECT_EQ(v.denominator, kMinDenominator);
  EXPECT_EQ(v.value, 1.0 / kMinDenominator);
}

TEST(ScoreVar, TwoOppositeVectors) {
  const ReferenceBank bank(Tensor::matrix(2, 2, {1, 0, -1, 0}));
  const std::vector<double> z{0.6, 0.8};
  const VarScore v = score_var(bank, z, 2);
  EXPECT_NEAR(v.denominator, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v.value, 0.6 / std::sqrt(2.0), 1e-15);
  EXPECT_FALSE(v.degenerate);
}

TEST(ScoreVar, QueryScaleKeepsDenominator) {
  std::mt19937_64 rng(3);
  const ReferenceBank bank(oracle::to_tensor(oracle::random_rows(rng, 30, 5)));
  std::vector<double> z = oracle::random_rows(rng, 1, 5)[0];
  const VarScore a = score_var(bank, z, 6);
  for (double& v : z) v *= 13.0;
  const VarScore b = score_var(bank, z, 6);
  EXPECT_EQ(a.denominator, b.denominator);
  EXPECT_NEAR(a.value, b.value, 1e-12);
}

TEST(ScoreVar, BadKIsConfigError) {
  const ReferenceBank bank(Tensor::matrix(2, 2, {1, 0, -1, 0}));
  const std::vector<double> z{1, 0};
  EXPECT_THROW(score_var(bank, z, 1), ConfigError);
  EXPECT_THROW(score_var(bank, z, 3), ConfigError);
}

TEST(ScoreVar, MatchesSortingOracle) {
  for (std::uint64_t s = 0; s < 120; ++s) {
    std::mt19937_64 rng(s + 1000);
    const oracle::Rows bank = oracle::random_rows(rng, 20, 8);
    const oracle::Row z = oracle::random_rows(rng, 1, 8)[0];
    const std::size_t k = 2 + s % 10;
    EXPECT_NEAR(score_var(ReferenceBank(oracle::to_tensor(bank)), z, k).value,
                oracle::score_var(bank, z, k), 1e-10);
  }
}

TEST(Auroc, Examples) {
  const std::vector<double> id{2, 3};
  const std::vector<double> ood{0, 1};
  EXPECT_EQ(auroc(id, ood), 1.0);
  const std::vector<double> same{4, 4, 4};
  EXPECT_EQ(auroc(same, same), 0.5);
  const std::vector<double> empty;
  EXPECT_THROW(auroc(empty, ood), ContractError);
  EXPECT_THROW(auroc(id, empty), ContractError);
  const std::vector<double> nan{std::nan("")};
  EXPECT_THROW(auroc(nan, ood), DomainError);
}

TEST(Auroc, MatchesPairwiseOracle) {
  for (std::uint64_t s = 0; s < 120; ++s) {
    std::mt19937_64 rng(s);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> coarse(0, 6);
    std::vector<double> id(50);
    std::vector<double> ood(50);
    // Alternate continuous and heavily tied inputs.
    for (auto& v : id) v = s % 2 ? n(rng) + 0.5 : coarse(rng);
    for (auto& v : ood) v = s % 2 ? n(rng) : coarse(rng) - 1;
    EXPECT_NEAR(auroc(id, ood), oracle::auroc(id, ood), 1e-12);
  }
}

TEST(Auroc, ComplementSumsToOne) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    std::mt19937_64 rng(s);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> a(17);
    std::vector<double> b(23);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng) + 0.3;
    EXPECT_NEAR(auroc(a, b) + auroc(b, a), 1.0, 1e-14);
  }
}

TEST(Auroc, InvariantUnderIncreasingTransform) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(40);
  std::vector<double> b(40);
  for (auto& v : a) v = n(rng);
  for (auto& v : b) v = n(rng) - 0.4;
  std::vector<double> ta;
  std::vector<double> tb;
  for (double v : a) ta.push_back(std::exp(3.0 * v) + 2.0);
  for (double v : b) tb.push_back(std::exp(3.0 * v) + 2.0);
  EXPECT_EQ(auroc(a, b), auroc(ta, tb));
}

TEST(ScoreCos, HomogeneousInBankNorms) {
  std::mt19937_64 rng(6);
  const oracle::Rows bank = oracle::random_rows(rng, 25, 6);
  const oracle::Rows id_q = oracle::random_rows(rng, 15, 6);
  oracle::Rows ood_q = oracle::random_rows(rng, 15, 6);
  const ReferenceBank b1(oracle::to_tensor(bank));
  const ReferenceBank b2(ad::scale(oracle::to_tensor(bank), 2.5));
  std::vector<double> s1_id, s2_id, s1_ood, s2_ood;
  for (const auto& q : id_q) {
    s1_id.push_back(score_cos(b1, q));
    s2_id.push_back(score_cos(b2, q));
    EXPECT_NEAR(s2_id.back(), 2.5 * s1_id.back(), 1e-12);
  }
  for (const auto& q : ood_q) {
    s1_ood.push_back(score_cos(b1, q));
    s2_ood.push_back(score_cos(b2, q));
  }
  EXPECT_EQ(auroc(s1_id, s1_ood), auroc(s2_id, s2_ood));
}

TEST(Kind, ParseRoundTrip) {
  EXPECT_EQ(parse_score_kind("cos"), ScoreKind::kCos);
  EXPECT_EQ(parse_score_kind(to_string(ScoreKind::kVar)), ScoreKind::kVar);
  EXPECT_THROW(parse_score_kind("maha"), ConfigError);
}

TEST(Report, CsvLayout) {
  std::mt19937_64 rng(8);
  const ReferenceBank bank(oracle::to_tensor(oracle::random_rows(rng, 12, 3)));
  const NamedFeatures id{"id_test", oracle::to_tensor(oracle::random_rows(rng, 4, 3))};
  const std::vector<NamedFeatures> ood{{"ood_a", oracle::to_tensor(oracle::random_rows(rng, 5, 3))}};
  const ScoreReport rep = score_sets(bank, id, ood, ScoreKind::kVar, 3);
  ASSERT_EQ(rep.auroc.size(), 1u);
  EXPECT_EQ(rep.id.scores.size(), 4u);
  EXPECT_EQ(rep.ood[0].denominators.size(), 5u);
  const auto dir = std::filesystem::temp_directory_path() / "ccl_test_report";
  std::filesystem::create_directories(dir);
  write_scores_csv(rep, dir / "scores.csv");
  write_summary_csv(rep, dir / "summary.csv");
  std::ifstream scores(dir / "scores.csv");
  std::string line;
  std::getline(scores, line);
  EXPECT_EQ(line, "set,sample_id,score");
  std::size_t rows = 0;
  while (std::getline(scores, line)) ++rows;
  EXPECT_EQ(rows, 9u);
  std::ifstream summary(dir / "summary.csv");
  std::getline(summary, line);
  EXPECT_EQ(line, "ood_set,score_kind,k,auroc");
  std::getline(summary, line);
  EXPECT_EQ(line.rfind("ood_a,var,3,", 0), 0u) << line;
}

}  // namespace
}  // namespace ccl::scoring
