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

#include <filesystem>
#include <optional>

#include "ccl/clustering.hpp"
#include "ccl/config.hpp"
#include "ccl/model.hpp"

namespace ccl {

// Versioned binary snapshot: config text and hash, every parameter array,
// and the cluster state when one exists. Doubles are stored as raw IEEE-754
// bytes, so a save/load round trip is bit-exact.
struct Checkpoint {
  TrainConfig config;
  model::ModelParams params;
  std::optional<clustering::ClusterState> clusters;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ccl
