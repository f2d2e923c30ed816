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

#include "ccl/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ccl/errors.hpp"

namespace ccl::model {
namespace {

Linear make_linear(std::mt19937_64& rng, std::size_t in, std::size_t out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> w(in * out);
  for (double& v : w) v = dist(rng);
  std::vector<double> b(out);
  for (double& v : b) v = dist(rng);
  return Linear{ad::Tensor::matrix(in, out, std::move(w)),
                ad::Tensor::matrix(1, out, std::move(b))};
}

ad::Tensor apply(const std::vector<Linear>& layers, const ad::Tensor& x,
                 const char* what) {
  if (layers.empty()) throw ContractError(std::string(what) + " has no layers");
  if (x.rank() != 2 || x.cols() != layers.front().weight.rows()) {
    throw DimensionError(std::string(what) + ": input shape " +
                         ad::shape_string(x.shape()) + " but layer expects " +
                         std::to_string(layers.front().weight.rows()) +
                         " columns");
  }
  ad::Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = ad::add(ad::matmul(h, layers[i].weight), layers[i].bias);
    if (i + 1 < layers.size()) h = ad::relu(h);
  }
  return h;
}

Linear track_linear(ad::Tape& tape, const Linear& l) {
  return Linear{tape.leaf(l.weight), tape.leaf(l.bias)};
}

}  // namespace

std::size_t EncoderParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().weight.rows();
}
std::size_t EncoderParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().weight.cols();
}
std::size_t ProjectionParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().weight.rows();
}
std::size_t ProjectionParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().weight.cols();
}

void validate(const ModelWidths& widths) {
  if (widths.encoder.size() < 2) {
    throw ConfigError("encoder widths need an input and an embedding width");
  }
  if (widths.projection.size() != 3) {
    throw ConfigError("projection head widths must be [d_h, hidden, d_z]");
  }
  for (auto w : widths.encoder) {
    if (w == 0) throw ConfigError("encoder widths must be positive");
  }
  for (auto w : widths.projection) {
    if (w == 0) throw ConfigError("projection widths must be positive");
  }
  if (widths.projection.front() != widths.encoder.back()) {
    throw ConfigError("projection input width " +
                      std::to_string(widths.projection.front()) +
                      " differs from embedding width " +
                      std::to_string(widths.encoder.back()));
  }
  if (widths.projection.back() > widths.projection.front()) {
    throw ConfigError("projection width d_z must not exceed d_h");
  }
}

ModelParams init(std::uint64_t seed, const ModelWidths& widths) {
  validate(widths);
  std::mt19937_64 rng(seed);
  ModelParams p;
  for (std::size_t i = 0; i + 1 < widths.encoder.size(); ++i) {
    p.encoder.layers.push_back(
        make_linear(rng, widths.encoder[i], widths.encoder[i + 1]));
  }
  for (std::size_t i = 0; i + 1 < widths.projection.size(); ++i) {
    p.projection.layers.push_back(
        make_linear(rng, widths.projection[i], widths.projection[i + 1]));
  }
  return p;
}

ad::Tensor encode(const EncoderParams& params, const ad::Tensor& batch) {
  return apply(params.layers, batch, "encode");
}

ad::Tensor project(const ProjectionParams& params,
                   const ad::Tensor& embeddings) {
  return apply(params.layers, embeddings, "project");
}

EncodedBatch forward(const ModelParams& params, const ad::Tensor& inputs) {
  EncodedBatch out;
  out.inputs = inputs;
  out.embeddings = encode(params.encoder, inputs);
  out.projections = project(params.projection, out.embeddings);
  return out;
}

ModelParams track(ad::Tape& tape, const ModelParams& params) {
  ModelParams out;
  for (const auto& l : params.encoder.layers) {
    out.encoder.layers.push_back(track_linear(tape, l));
  }
  for (const auto& l : params.projection.layers) {
    out.projection.layers.push_back(track_linear(tape, l));
  }
  return out;
}

std::vector<const ad::Tensor*> parameters(const ModelParams& params) {
  std::vector<const ad::Tensor*> out;
  for (const auto& l : params.encoder.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (const auto& l : params.projection.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<ad::Tensor*> parameters(ModelParams& params) {
  std::vector<ad::Tensor*> out;
  for (auto& l : params.encoder.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (auto& l : params.projection.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

ModelWidths widths_of(const ModelParams& params) {
  ModelWidths w;
  w.encoder.clear();
  w.projection.clear();
  if (!params.encoder.layers.empty()) {
    w.encoder.push_back(params.encoder.input_dim());
    for (const auto& l : params.encoder.layers) w.encoder.push_back(l.weight.cols());
  }
  if (!params.projection.layers.empty()) {
    w.projection.push_back(params.projection.input_dim());
    for (const auto& l : params.projection.layers) {
      w.projection.push_back(l.weight.cols());
    }
  }
  return w;
}

}  // namespace ccl::model
