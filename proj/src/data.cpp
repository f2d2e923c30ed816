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

#include "ccl/data.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ccl/errors.hpp"

namespace ccl {
namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

Vec gaussian_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(d);
  for (double& x : v) x = normal(rng);
  return v;
}

// Unit vector orthogonal to every vector in `basis` (assumed orthonormal).
Vec orthogonal_direction(const std::vector<Vec>& basis, std::size_t d,
                         std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vec v = gaussian_vector(d, rng);
    for (const Vec& b : basis) {
      const double p = dot(v, b);
      for (std::size_t i = 0; i < d; ++i) v[i] -= p * b[i];
    }
    if (std::sqrt(dot(v, v)) > 1e-6) {
      normalize(v);
      return v;
    }
  }
  throw NumericError("could not draw a direction orthogonal to the ID means");
}

std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vectors) {
  std::vector<Vec> basis;
  for (Vec v : vectors) {
    for (const Vec& b : basis) {
      const double p = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
    }
    const double n = std::sqrt(dot(v, v));
    if (n > 1e-9) {
      for (double& x : v) x /= n;
      basis.push_back(std::move(v));
    }
  }
  return basis;
}

// Rows cycle through the means: row i belongs to component i % C.
ad::Tensor mixture_samples(const std::vector<Vec>& means, std::size_t per_component,
                           double stddev, std::mt19937_64& rng) {
  const std::size_t c = means.size();
  const std::size_t d = means.front().size();
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> out;
  out.reserve(c * per_component * d);
  for (std::size_t i = 0; i < c * per_component; ++i) {
    const Vec& mu = means[i % c];
    for (std::size_t k = 0; k < d; ++k) out.push_back(mu[k] + normal(rng));
  }
  return ad::Tensor::matrix(c * per_component, d, std::move(out));
}

std::string provenance_of(const DatasetSpec& s, std::uint64_t seed,
                          const std::string& extra) {
  std::ostringstream os;
  os.precision(17);
  os << "seed=" << seed << " dims=" << s.dims << " components=" << s.components
     << " spread=" << s.component_spread << ' ' << extra;
  return os.str();
}

}  // namespace

std::vector<const NamedSet*> DatasetBundle::all_sets() const {
  std::vector<const NamedSet*> out{&id_train, &id_test};
  for (const auto& s : ood_sets) out.push_back(&s);
  return out;
}

const NamedSet& DatasetBundle::find(std::string_view name) const {
  for (const NamedSet* s : all_sets()) {
    if (s->name == name) return *s;
  }
  throw ConfigError("dataset has no set named '" + std::string(name) + "'");
}

DatasetBundle generate_synthetic(const DatasetSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = spec.dims;
  const std::size_t c = spec.components;

  std::vector<Vec> means;
  for (std::size_t j = 0; j < c; ++j) {
    Vec mu = gaussian_vector(d, rng);
    normalize(mu);
    means.push_back(std::move(mu));
  }

  DatasetBundle b;
  b.id_train = {"id_train", mixture_samples(means, spec.train_per_component,
                                            spec.component_spread, rng),
                provenance_of(spec, seed, "kind=id per_component=" +
                                              std::to_string(spec.train_per_component))};
  b.id_test = {"id_test", mixture_samples(means, spec.test_per_component,
                                          spec.component_spread, rng),
               provenance_of(spec, seed, "kind=id per_component=" +
                                             std::to_string(spec.test_per_component))};

  const std::size_t per_ood = (spec.ood_per_set + c - 1) / c;
  auto trim_rows = [&](ad::Tensor t) {
    std::vector<double> v(t.values().begin(),
                          t.values().begin() +
                              static_cast<std::ptrdiff_t>(spec.ood_per_set * d));
    return ad::Tensor::matrix(spec.ood_per_set, d, std::move(v));
  };

  // Shifted: rotate each mean toward a direction outside the ID span.
  {
    const double theta = spec.shift_angle_deg * std::numbers::pi / 180.0;
    const auto basis = orthonormal_basis(means);
    std::vector<Vec> shifted;
    for (const Vec& mu : means) {
      const Vec u = orthogonal_direction(basis, d, rng);
      Vec m(d);
      for (std::size_t k = 0; k < d; ++k) {
        m[k] = std::cos(theta) * mu[k] + std::sin(theta) * u[k];
      }
      shifted.push_back(std::move(m));
    }
    std::ostringstream extra;
    extra.precision(17);
    extra << "kind=shifted angle_deg=" << spec.shift_angle_deg;
    b.ood_sets.push_back(
        {"ood_shifted",
         trim_rows(mixture_samples(shifted, per_ood, spec.component_spread, rng)),
         provenance_of(spec, seed, extra.str())});
  }

  // Scaled: same means, covariance times scaled_covariance.
  {
    std::ostringstream extra;
    extra.precision(17);
    extra << "kind=scaled covariance_factor=" << spec.scaled_covariance;
    b.ood_sets.push_back(
        {"ood_scaled",
         trim_rows(mixture_samples(
             means, per_ood,
             spec.component_spread * std::sqrt(spec.scaled_covariance), rng)),
         provenance_of(spec, seed, extra.str())});
  }

  // Interp: midpoints of fresh ID draws from two distinct components.
  {
    std::uniform_int_distribution<std::size_t> pick(0, c - 1);
    std::uniform_int_distribution<std::size_t> pick_other(0, c - 2);
    std::normal_distribution<double> spread(0.0, spec.component_spread);
    std::normal_distribution<double> noise(0.0, spec.interp_noise);
    std::vector<double> out;
    out.reserve(spec.ood_per_set * d);
    for (std::size_t i = 0; i < spec.ood_per_set; ++i) {
      const std::size_t a = pick(rng);
      std::size_t other = pick_other(rng);
      if (other >= a) ++other;
      Vec xa(d);
      Vec xb(d);
      for (std::size_t k = 0; k < d; ++k) xa[k] = means[a][k] + spread(rng);
      for (std::size_t k = 0; k < d; ++k) xb[k] = means[other][k] + spread(rng);
      for (std::size_t k = 0; k < d; ++k) {
        out.push_back(0.5 * (xa[k] + xb[k]) + noise(rng));
      }
    }
    std::ostringstream extra;
    extra.precision(17);
    extra << "kind=interp noise=" << spec.interp_noise;
    b.ood_sets.push_back(
        {"ood_interp", ad::Tensor::matrix(spec.ood_per_set, d, std::move(out)),
         provenance_of(spec, seed, extra.str())});
  }
  return b;
}

ad::Tensor augment(const ad::Tensor& batch, const AugmentOptions& options,
                   std::mt19937_64& rng) {
  const std::size_t n = batch.rows();
  const std::size_t d = batch.cols();
  if (n < 1) throw ContractError("augment needs at least one row");
  std::bernoulli_distribution masked(options.mask_prob);
  std::uniform_real_distribution<double> gain(options.gain_min, options.gain_max);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> out(2 * n * d);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t view = 0; view < 2; ++view) {
      const double g =
          options.gain_min == options.gain_max ? options.gain_min : gain(rng);
      double* row = &out[(2 * k + view) * d];
      for (std::size_t j = 0; j < d; ++j) {
        const bool drop = options.mask_prob > 0.0 && masked(rng);
        const double eps = options.noise > 0.0 ? options.noise * noise(rng) : 0.0;
        row[j] = g * (drop ? 0.0 : batch(k, j)) + eps;
      }
    }
  }
  return ad::Tensor::matrix(2 * n, d, std::move(out));
}

// ---------------------------------------------------------------------------
// Files

void write_set_csv(const NamedSet& set, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.precision(17);
  const std::size_t d = set.samples.cols();
  os << set.name << ',' << d << '\n';
  for (std::size_t i = 0; i < set.samples.rows(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      if (k > 0) os << ',';
      os << set.samples(i, k);
    }
    os << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

NamedSet read_set_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  const auto comma = line.find(',');
  if (comma == std::string::npos) {
    throw IoError(path.string() + ": header must be '<name>,<dims>'");
  }
  NamedSet set;
  set.name = line.substr(0, comma);
  std::size_t d = 0;
  {
    const std::string dims = line.substr(comma + 1);
    auto [ptr, ec] = std::from_chars(dims.data(), dims.data() + dims.size(), d);
    if (ec != std::errc() || d == 0) {
      throw IoError(path.string() + ": bad dims in header");
    }
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw IoError(path.string() + ": bad number on row " +
                      std::to_string(rows + 1));
      }
      values.push_back(v);
      ++count;
      p = ptr;
      if (p < end && *p == ',') ++p;
    }
    if (count != d) {
      throw IoError(path.string() + ": row " + std::to_string(rows + 1) +
                    " has " + std::to_string(count) + " values, expected " +
                    std::to_string(d));
    }
    ++rows;
  }
  set.samples = ad::Tensor::matrix(rows, d, std::move(values));
  return set;
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "bundle.txt", std::ios::binary | std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + (dir / "bundle.txt").string());
  for (const NamedSet* s : bundle.all_sets()) {
    write_set_csv(*s, dir / (s->name + ".csv"));
    manifest << s->name << '\t' << s->provenance << '\n';
  }
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "bundle.txt", std::ios::binary);
  if (!manifest) throw IoError("cannot read " + (dir / "bundle.txt").string());
  std::vector<NamedSet> sets;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string name = line.substr(0, tab);
    NamedSet s = read_set_csv(dir / (name + ".csv"));
    if (s.name != name) {
      throw IoError(name + ".csv declares set '" + s.name + "'");
    }
    if (tab != std::string::npos) s.provenance = line.substr(tab + 1);
    sets.push_back(std::move(s));
  }
  if (sets.size() < 3) {
    throw IoError("bundle needs id_train, id_test and at least one OOD set");
  }
  DatasetBundle b;
  b.id_train = std::move(sets[0]);
  b.id_test = std::move(sets[1]);
  for (std::size_t i = 2; i < sets.size(); ++i) b.ood_sets.push_back(std::move(sets[i]));
  if (b.id_train.name != "id_train" || b.id_test.name != "id_test") {
    throw IoError("bundle must list id_train and id_test first");
  }
  const std::size_t d = b.dims();
  for (const NamedSet* s : b.all_sets()) {
    if (s->samples.cols() != d) {
      throw ConfigError("set '" + s->name + "' has " +
                        std::to_string(s->samples.cols()) + " dims, expected " +
                        std::to_string(d));
    }
  }
  return b;
}

}  // namespace ccl
