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

#include "ccl/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include "ccl/errors.hpp"

namespace ccl::scoring {
namespace {

double norm_of(std::span<const double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss);
}

// Per-row s(f_m, z) |f_m|.
std::vector<double> candidate_scores(const ReferenceBank& bank,
                                     std::span<const double> z) {
  if (bank.size() == 0) throw ContractError("score on an empty reference bank");
  if (z.size() != bank.dim()) {
    throw DimensionError("score: query has " + std::to_string(z.size()) +
                         " dims, bank " + std::to_string(bank.dim()));
  }
  const double zn = norm_of(z);
  if (!(zn > 0.0)) throw DomainError("score: query has zero norm");
  const auto& f = bank.features();
  const std::size_t d = bank.dim();
  auto fv = f.values();
  std::vector<double> out(bank.size());
  for (std::size_t m = 0; m < bank.size(); ++m) {
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += fv[m * d + k] * z[k];
    const double fn = bank.norms()[m];
    out[m] = dot / (fn * zn) * fn;
  }
  return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.precision(17);
  return os;
}

}  // namespace

std::string_view to_string(ScoreKind kind) {
  return kind == ScoreKind::kCos ? "cos" : "var";
}

ScoreKind parse_score_kind(std::string_view name) {
  if (name == "cos") return ScoreKind::kCos;
  if (name == "var") return ScoreKind::kVar;
  throw ConfigError("unknown score kind '" + std::string(name) +
                    "' (expected cos or var)");
}

ReferenceBank::ReferenceBank(ad::Tensor features)
    : features_(features.detached()) {
  if (features_.rank() != 2) {
    throw DimensionError("reference bank needs a matrix, got " +
                         ad::shape_string(features_.shape()));
  }
  if (features_.rows() == 0) throw ContractError("reference bank is empty");
  norms_.resize(features_.rows());
  for (std::size_t m = 0; m < features_.rows(); ++m) {
    auto row = features_.row(m);
    norms_[m] = norm_of(row);
    if (!(norms_[m] > 0.0)) {
      throw DomainError("reference bank row " + std::to_string(m) +
                        " has zero norm");
    }
  }
}

double score_cos(const ReferenceBank& bank, std::span<const double> z) {
  auto scores = candidate_scores(bank, z);
  return *std::max_element(scores.begin(), scores.end());
}

VarScore score_var(const ReferenceBank& bank, std::span<const double> z,
                   std::size_t k_top) {
  if (k_top < 2 || k_top > bank.size()) {
    throw ConfigError("score_var: K must lie in [2, " +
                      std::to_string(bank.size()) + "], got " +
                      std::to_string(k_top));
  }
  auto scores = candidate_scores(bank, z);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(k_top),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  const std::size_t d = bank.dim();
  auto fv = bank.features().values();
  std::vector<double> centroid(d, 0.0);
  for (std::size_t t = 0; t < k_top; ++t) {
    for (std::size_t k = 0; k < d; ++k) centroid[k] += fv[order[t] * d + k];
  }
  for (double& c : centroid) c /= static_cast<double>(k_top);
  double spread = 0.0;
  for (std::size_t t = 0; t < k_top; ++t) {
    for (std::size_t k = 0; k < d; ++k) {
      const double dev = fv[order[t] * d + k] - centroid[k];
      spread += dev * dev;
    }
  }
  VarScore out;
  out.cos_score = scores[order[0]];
  const double raw = std::sqrt(spread / static_cast<double>(k_top - 1));
  out.degenerate = raw < kMinDenominator;
  out.denominator = out.degenerate ? kMinDenominator : raw;
  out.value = out.cos_score / out.denominator;
  return out;
}

double auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores) {
  if (id_scores.empty() || ood_scores.empty()) {
    throw ContractError("auroc needs non-empty ID and OOD score lists");
  }
  std::vector<std::pair<double, bool>> all;
  all.reserve(id_scores.size() + ood_scores.size());
  for (double s : id_scores) all.emplace_back(s, true);
  for (double s : ood_scores) all.emplace_back(s, false);
  for (const auto& [s, is_id] : all) {
    if (std::isnan(s)) throw DomainError("auroc: NaN score");
  }
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Sum of 1-based midranks of ID scores.
  double id_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second) id_rank_sum += midrank;
    }
    i = j;
  }
  const auto n_id = static_cast<double>(id_scores.size());
  const auto n_ood = static_cast<double>(ood_scores.size());
  const double u = id_rank_sum - n_id * (n_id + 1.0) / 2.0;
  return u / (n_id * n_ood);
}

namespace {

SetScores score_one(const ReferenceBank& bank, const NamedFeatures& set,
                    ScoreKind kind, std::size_t k_top) {
  SetScores out;
  out.name = set.name;
  const std::size_t n = set.features.rows();
  out.scores.resize(n);
  if (kind == ScoreKind::kVar) out.denominators.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto z = set.features.row(i);
    if (kind == ScoreKind::kCos) {
      out.scores[i] = score_cos(bank, z);
    } else {
      VarScore v = score_var(bank, z, k_top);
      out.scores[i] = v.value;
      out.denominators[i] = v.denominator;
    }
  }
  return out;
}

}  // namespace

ScoreReport score_sets(const ReferenceBank& bank, const NamedFeatures& id_set,
                       const std::vector<NamedFeatures>& ood_sets,
                       ScoreKind kind, std::size_t k_top) {
  if (kind == ScoreKind::kVar && (k_top < 2 || k_top > bank.size())) {
    throw ConfigError("score_var: K must lie in [2, " +
                      std::to_string(bank.size()) + "], got " +
                      std::to_string(k_top));
  }
  ScoreReport report;
  report.kind = kind;
  report.k_top = k_top;
  report.id = score_one(bank, id_set, kind, k_top);
  for (const auto& set : ood_sets) {
    report.ood.push_back(score_one(bank, set, kind, k_top));
    report.auroc.push_back(auroc(report.id.scores, report.ood.back().scores));
  }
  return report;
}

void write_scores_csv(const ScoreReport& report,
                      const std::filesystem::path& path) {
  auto os = open_for_write(path);
  os << "set,sample_id,score\n";
  auto emit = [&](const SetScores& s) {
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      os << s.name << ',' << i << ',' << s.scores[i] << '\n';
    }
  };
  emit(report.id);
  for (const auto& s : report.ood) emit(s);
  if (!os) throw IoError("failed writing " + path.string());
}

void write_summary_csv(const ScoreReport& report,
                       const std::filesystem::path& path) {
  auto os = open_for_write(path);
  os << "ood_set,score_kind,k,auroc\n";
  for (std::size_t i = 0; i < report.ood.size(); ++i) {
    os << report.ood[i].name << ',' << to_string(report.kind) << ','
       << report.k_top << ',' << report.auroc[i] << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace ccl::scoring
