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

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ccl/autodiff.hpp"
#include "ccl/config.hpp"

namespace ccl {

struct NamedSet {
  std::string name;
  ad::Tensor samples;  // rows x dims
  std::string provenance;
};

struct DatasetBundle {
  NamedSet id_train;
  NamedSet id_test;
  std::vector<NamedSet> ood_sets;

  std::size_t dims() const { return id_train.samples.cols(); }
  // id_train, id_test, then the OOD sets in order.
  std::vector<const NamedSet*> all_sets() const;
  const NamedSet& find(std::string_view name) const;
};

// ID: C-component Gaussian mixture with unit-norm means. OOD sets:
//   ood_shifted  means rotated by the shift angle toward directions
//                orthogonal to every ID mean
//   ood_scaled   the ID mixture with covariance multiplied
//   ood_interp   midpoints of ID pairs drawn from distinct components, plus
//                small noise
DatasetBundle generate_synthetic(const DatasetSpec& spec, std::uint64_t seed);

// Rows 2k and 2k+1 of the result are two independent views of source row k:
// gain * (mask . x) + noise.
ad::Tensor augment(const ad::Tensor& batch, const AugmentOptions& options,
                   std::mt19937_64& rng);

// One `<name>.csv` per set (first line `<name>,<dims>`, then one sample per
// row) plus `bundle.txt` listing the sets in order with their provenance.
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_bundle(const std::filesystem::path& dir);

void write_set_csv(const NamedSet& set, const std::filesystem::path& path);
NamedSet read_set_csv(const std::filesystem::path& path);

}  // namespace ccl
