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
#include <filesystem>

#include "ccl/checkpoint.hpp"
#include "ccl/clustering.hpp"
#include "ccl/data.hpp"
#include "ccl/scoring.hpp"

namespace ccl {

// Builds the reference bank from id_train at the configured score layer and
// scores id_test and every OOD set.
scoring::ScoreReport evaluate(const Checkpoint& checkpoint,
                              const DatasetBundle& bundle,
                              scoring::ScoreKind kind, std::size_t k_top);

// CSV with header `set,index,f0,...`; one row per sample of every set.
void export_embeddings(const Checkpoint& checkpoint, const DatasetBundle& bundle,
                       clustering::Layer layer,
                       const std::filesystem::path& path);

}  // namespace ccl
