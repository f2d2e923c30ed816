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
#include <vector>

#include "ccl/autodiff.hpp"

namespace ccl::model {

// One affine layer: y = x W + b with W of shape in x out and b of shape 1 x out.
struct Linear {
  ad::Tensor weight;
  ad::Tensor bias;
};

// Backbone encoder F. ReLU sits between consecutive layers; the last layer
// (the embedding layer) is affine.
struct EncoderParams {
  std::vector<Linear> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
};

// Projection head G, a two-layer MLP with a ReLU in between. Its last layer
// is the projection layer.
struct ProjectionParams {
  std::vector<Linear> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
};

struct ModelParams {
  EncoderParams encoder;
  ProjectionParams projection;
};

// encoder: input width, hidden widths..., embedding width d_h.
// projection: d_h, hidden width, projection width d_z.
struct ModelWidths {
  std::vector<std::size_t> encoder{16, 64, 64, 32};
  std::vector<std::size_t> projection{32, 32, 16};
};

struct EncodedBatch {
  ad::Tensor inputs;
  ad::Tensor embeddings;
  ad::Tensor projections;
};

void validate(const ModelWidths& widths);

// Deterministic in `seed`. Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
ModelParams init(std::uint64_t seed, const ModelWidths& widths);

ad::Tensor encode(const EncoderParams& params, const ad::Tensor& batch);
ad::Tensor project(const ProjectionParams& params, const ad::Tensor& embeddings);

EncodedBatch forward(const ModelParams& params, const ad::Tensor& inputs);

// Copy of `params` with every array registered as a leaf on `tape`.
ModelParams track(ad::Tape& tape, const ModelParams& params);

// Every parameter array in a fixed order: encoder layers (W, b), then
// projection layers (W, b).
std::vector<const ad::Tensor*> parameters(const ModelParams& params);
std::vector<ad::Tensor*> parameters(ModelParams& params);

ModelWidths widths_of(const ModelParams& params);

}  // namespace ccl::model
