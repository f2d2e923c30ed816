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

#include "ccl/evaluate.hpp"

#include <fstream>

#include "ccl/errors.hpp"
#include "ccl/train.hpp"

namespace ccl {
namespace {

void check_dims(const Checkpoint& checkpoint, const DatasetBundle& bundle) {
  const std::size_t want = checkpoint.params.encoder.input_dim();
  for (const NamedSet* s : bundle.all_sets()) {
    if (s->samples.cols() != want) {
      throw ConfigError("set '" + s->name + "' has " +
                        std::to_string(s->samples.cols()) +
                        " dims but the checkpoint expects " +
                        std::to_string(want));
    }
  }
}

}  // namespace

scoring::ScoreReport evaluate(const Checkpoint& checkpoint,
                              const DatasetBundle& bundle,
                              scoring::ScoreKind kind, std::size_t k_top) {
  check_dims(checkpoint, bundle);
  const auto layer = checkpoint.config.score_layer;
  scoring::ReferenceBank bank(
      features(checkpoint.params, bundle.id_train.samples, layer));
  std::vector<scoring::NamedFeatures> ood;
  for (const auto& s : bundle.ood_sets) {
    ood.push_back({s.name, features(checkpoint.params, s.samples, layer)});
  }
  return scoring::score_sets(
      bank,
      {bundle.id_test.name, features(checkpoint.params, bundle.id_test.samples, layer)},
      ood, kind, k_top);
}

void export_embeddings(const Checkpoint& checkpoint, const DatasetBundle& bundle,
                       clustering::Layer layer,
                       const std::filesystem::path& path) {
  check_dims(checkpoint, bundle);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.precision(17);
  const std::size_t width = layer == clustering::Layer::kEmbedding
                                ? checkpoint.params.encoder.output_dim()
                                : checkpoint.params.projection.output_dim();
  os << "set,index";
  for (std::size_t k = 0; k < width; ++k) os << ",f" << k;
  os << '\n';
  for (const NamedSet* s : bundle.all_sets()) {
    const ad::Tensor f = features(checkpoint.params, s->samples, layer);
    for (std::size_t i = 0; i < f.rows(); ++i) {
      os << s->name << ',' << i;
      for (std::size_t k = 0; k < f.cols(); ++k) os << ',' << f(i, k);
      os << '\n';
    }
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace ccl
