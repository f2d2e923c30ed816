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

#include "ccl/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "ccl/errors.hpp"
#include "ccl/losses.hpp"
#include "ccl/scoring.hpp"

namespace ccl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent streams so that cluster refits never perturb the batch order
// or augmentation draws.
constexpr std::uint64_t kModelStream = 0x6d6f64656cULL;
constexpr std::uint64_t kBatchStream = 0x6261746368ULL;
constexpr std::uint64_t kKMeansStream = 0x6b6d65616eULL;

ad::Tensor gather_rows(const ad::Tensor& x, std::span<const std::size_t> rows) {
  const std::size_t d = x.cols();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  auto v = x.values();
  for (std::size_t r : rows) {
    out.insert(out.end(), v.begin() + static_cast<std::ptrdiff_t>(r * d),
               v.begin() + static_cast<std::ptrdiff_t>((r + 1) * d));
  }
  return ad::Tensor::matrix(rows.size(), d, std::move(out));
}

clustering::ClusterState refit(const TrainConfig& config,
                               const model::ModelParams& params,
                               const DatasetBundle& bundle, std::size_t epoch,
                               std::size_t batch) {
  clustering::ClusterFitOptions opts;
  opts.clusters = config.resolved_clusters();
  opts.alpha = config.loss.alpha;
  opts.phi_floor = config.loss.phi_floor;
  opts.max_iters = config.kmeans_max_iters;
  opts.tol = config.kmeans_tol;
  opts.seed = splitmix64(config.seed ^ kKMeansStream ^
                         splitmix64((epoch << 20) + batch));
  const ad::Tensor feats =
      features(params, bundle.id_train.samples, config.clustering_layer);
  try {
    return clustering::fit_cluster_state(feats, config.clustering_layer,
                                         static_cast<std::int64_t>(epoch), opts);
  } catch (const Error& e) {
    throw NumericError("cluster fit failed at epoch " + std::to_string(epoch) +
                       ", batch " + std::to_string(batch) + ": " + e.what());
  }
}

double probe(const TrainConfig& config, const model::ModelParams& params,
             const DatasetBundle& bundle) {
  scoring::ReferenceBank bank(
      features(params, bundle.id_train.samples, config.score_layer));
  std::vector<scoring::NamedFeatures> ood;
  for (const auto& s : bundle.ood_sets) {
    ood.push_back({s.name, features(params, s.samples, config.score_layer)});
  }
  auto report = scoring::score_sets(
      bank, {"id_test", features(params, bundle.id_test.samples, config.score_layer)},
      ood, config.score_kind, config.k_top);
  double total = 0.0;
  for (double a : report.auroc) total += a;
  return total / static_cast<double>(report.auroc.size());
}

}  // namespace

ad::Tensor features(const model::ModelParams& params, const ad::Tensor& samples,
                    clustering::Layer layer) {
  ad::Tensor h = model::encode(params.encoder, samples.detached());
  if (layer == clustering::Layer::kEmbedding) return h;
  return model::project(params.projection, h);
}

double learning_rate_at(const TrainConfig& config, std::size_t epoch) {
  if (!config.cosine_annealing) return config.learning_rate;
  const double t = static_cast<double>(epoch) / static_cast<double>(config.epochs);
  return config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

TrainResult train(const TrainConfig& config, const DatasetBundle& bundle,
                  TrainObserver* observer) {
  config.validate();
  if (bundle.dims() != config.data.dims) {
    throw ConfigError("dataset has " + std::to_string(bundle.dims()) +
                      " dims but the config expects " +
                      std::to_string(config.data.dims));
  }
  const ad::Tensor& train_x = bundle.id_train.samples;
  const std::size_t m = train_x.rows();
  if (m < 2) throw ConfigError("training set needs at least two samples");

  TrainResult result;
  result.config = config;
  result.params = model::init(splitmix64(config.seed ^ kModelStream),
                              config.model_widths());
  std::mt19937_64 rng(splitmix64(config.seed ^ kBatchStream));
  const auto schedule = config.schedule();
  const bool cluster_on = config.cluster_loss_enabled();
  const std::size_t batch_size = std::min(config.batch_size, m);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochMetrics em;
    em.epoch = epoch;
    em.learning_rate = learning_rate_at(config, epoch);
    const bool joint = cluster_on && epoch >= config.warmup_epochs;

    if (cluster_on && clustering::should_update(epoch, schedule)) {
      em.refit = true;
      result.refit_epochs.push_back(epoch);
      if (!schedule.per_batch) {
        result.clusters = refit(config, result.params, bundle, epoch, 0);
        if (observer) observer->on_refit(epoch, *result.clusters);
      }
    }

    std::shuffle(order.begin(), order.end(), rng);
    double sum_self = 0.0;
    double sum_cluster = 0.0;
    double sum_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + 1 < m; start += batch_size) {
      const std::size_t stop = std::min(start + batch_size, m);
      if (stop - start < 2) break;
      if (joint && schedule.per_batch) {
        result.clusters = refit(config, result.params, bundle, epoch, batches);
        if (observer) observer->on_refit(epoch, *result.clusters);
      }
      const ad::Tensor views = augment(
          gather_rows(train_x, std::span(order).subspan(start, stop - start)),
          config.augment, rng);

      ad::Tape tape;
      model::ModelParams tracked = model::track(tape, result.params);
      model::EncodedBatch enc = model::forward(tracked, views);
      ad::Tensor l_self = losses::self_supervised_loss(enc.projections, config.loss.tau);
      ad::Tensor loss = l_self;
      if (joint) {
        const clustering::ClusterState& state = *result.clusters;
        const ad::Tensor& feats = config.clustering_layer == clustering::Layer::kEmbedding
                                      ? enc.embeddings
                                      : enc.projections;
        const std::vector<int> assigned =
            clustering::assign(feats.detached(), state.centers);
        std::optional<ad::Tensor> l_ccl;
        std::optional<ad::Tensor> l_cil;
        if (config.use_ccl) {
          l_ccl = losses::cluster_center_loss(feats, state.centers, assigned,
                                              state.phis,
                                              config.loss.denominator_includes_positive);
        }
        if (config.use_cil) {
          l_cil = losses::cluster_instance_loss(feats, assigned, config.loss.tau).value;
        }
        ad::Tensor l_cluster = l_ccl && l_cil ? losses::cluster_aware_loss(*l_ccl, *l_cil)
                               : l_ccl        ? *l_ccl
                                              : *l_cil;
        sum_cluster += l_cluster.item();
        loss = losses::total_loss(l_self, l_cluster, config.loss.lambda_weight);
      }
      if (!std::isfinite(loss.item())) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches));
      }
      sum_self += l_self.item();
      sum_total += loss.item();

      const ad::Gradients grads = tape.backward(loss);
      auto live = model::parameters(result.params);
      auto leaves = model::parameters(static_cast<const model::ModelParams&>(tracked));
      for (std::size_t p = 0; p < live.size(); ++p) {
        if (!grads.reached(*leaves[p])) continue;
        const ad::Tensor g = grads.of(*leaves[p]);
        auto dst = live[p]->mutable_values();
        auto src = g.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= em.learning_rate * src[i];
      }
      ++batches;
    }
    const auto nb = static_cast<double>(std::max<std::size_t>(batches, 1));
    em.loss_self = sum_self / nb;
    em.loss_total = sum_total / nb;
    if (joint) em.loss_cluster = sum_cluster / nb;
    if (config.probe_interval > 0 &&
        (epoch % config.probe_interval == 0 || epoch + 1 == config.epochs)) {
      em.probe_auroc = probe(config, result.params, bundle);
    }
    result.metrics.push_back(em);
    if (observer) observer->on_epoch_end(em, result.params);
  }
  return result;
}

void write_metrics_csv(const TrainResult& result,
                       const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.precision(17);
  const std::string hash = result.config.hash_hex();
  os << "config_hash,epoch,lr,loss_self,loss_cluster,loss_total,refit,probe_auroc\n";
  for (const auto& m : result.metrics) {
    os << hash << ',' << m.epoch << ',' << m.learning_rate << ',' << m.loss_self
       << ',';
    if (!std::isnan(m.loss_cluster)) os << m.loss_cluster;
    os << ',' << m.loss_total << ',' << (m.refit ? 1 : 0) << ',';
    if (!std::isnan(m.probe_auroc)) os << m.probe_auroc;
    os << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace ccl
