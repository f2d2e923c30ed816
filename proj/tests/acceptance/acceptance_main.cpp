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

// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ccl/ablate.hpp"
#include "ccl/checkpoint.hpp"
#include "ccl/clustering.hpp"
#include "ccl/config.hpp"
#include "ccl/data.hpp"
#include "ccl/evaluate.hpp"
#include "ccl/losses.hpp"
#include "ccl/scoring.hpp"
#include "ccl/train.hpp"
#include "oracles.hpp"

namespace {

using namespace ccl;
using ad::Tensor;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path out_dir() {
  const fs::path dir = fs::current_path() / "acceptance_out";
  fs::create_directories(dir);
  return dir;
}

struct Instance {
  oracle::Rows x;
  oracle::Rows centers;
  std::vector<int> assign;
  std::vector<double> phis;
  double lambda = 0.5;
};

Instance make_instance(std::uint64_t seed, std::size_t max_rows, std::size_t max_dim) {
  std::mt19937_64 rng(seed);
  Instance in;
  const std::size_t n2 = 2 * (2 + rng() % (max_rows / 2 - 1));
  const std::size_t d = 2 + rng() % (max_dim - 1);
  const std::size_t r = 2 + rng() % 3;
  in.x = oracle::random_rows(rng, n2, d);
  in.centers = oracle::random_rows(rng, r, d);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(r) - 1);
  std::uniform_real_distribution<double> phi(0.05, 1.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n2; ++i) in.assign.push_back(pick(rng));
  for (std::size_t j = 0; j < r; ++j) in.phis.push_back(phi(rng));
  in.lambda = unit(rng);
  return in;
}

using LossFn = std::function<Tensor(const Tensor&, const Instance&)>;

const std::vector<std::pair<const char*, LossFn>>& loss_suite() {
  static const std::vector<std::pair<const char*, LossFn>> suite{
      {"nt_xent_pair", [](const Tensor& x, const Instance&) {
         return losses::nt_xent_pair(1, 0, x, 0.5);
       }},
      {"self_supervised", [](const Tensor& x, const Instance&) {
         return losses::self_supervised_loss(x, 0.5);
       }},
      {"cluster_center", [](const Tensor& x, const Instance& in) {
         return losses::cluster_center_loss(x, oracle::to_tensor(in.centers), in.assign, in.phis);
       }},
      {"cluster_instance", [](const Tensor& x, const Instance& in) {
         return losses::cluster_instance_loss(x, in.assign, 0.5).value;
       }},
      {"cluster_aware", [](const Tensor& x, const Instance& in) {
         return losses::cluster_aware_loss(
             losses::cluster_center_loss(x, oracle::to_tensor(in.centers), in.assign, in.phis),
             losses::cluster_instance_loss(x, in.assign, 0.5).value);
       }},
      {"total", [](const Tensor& x, const Instance& in) {
         const Tensor cluster = losses::cluster_aware_loss(
             losses::cluster_center_loss(x, oracle::to_tensor(in.centers), in.assign, in.phis),
             losses::cluster_instance_loss(x, in.assign, 0.5).value);
         return losses::total_loss(losses::self_supervised_loss(x, 0.5), cluster, in.lambda);
       }},
  };
  return suite;
}

Verdict gradient_suite() {
  constexpr std::size_t kInstances = 25;
  double worst = 0.0;
  std::string worst_at;
  for (const auto& [name, f] : loss_suite()) {
    for (std::uint64_t s = 0; s < kInstances; ++s) {
      const Instance in = make_instance(1000 + s, 8, 16);
      const double err = ad::finite_difference_check(
          [&](const Tensor& x) { return f(x, in); }, oracle::to_tensor(in.x), 1e-5);
      if (!(err <= worst)) {
        worst = err;
        worst_at = fmt("%s seed %llu", name, static_cast<unsigned long long>(s));
      }
    }
  }
  return {worst < 1e-4,
          fmt("6 losses x %zu instances, worst relative error %.3g (%s), limit 1e-4",
              kInstances, worst, worst_at.c_str())};
}

Verdict oracle_suite() {
  constexpr std::size_t kInstances = 120;
  double worst = 0.0;
  std::string worst_at;
  std::size_t assign_mismatch = 0;
  auto track = [&](const char* what, std::uint64_t s, double a, double b) {
    const double d = std::abs(a - b);
    if (!(d <= worst)) {
      worst = d;
      worst_at = fmt("%s seed %llu", what, static_cast<unsigned long long>(s));
    }
  };
  for (std::uint64_t s = 0; s < kInstances; ++s) {
    const Instance in = make_instance(5000 + s, 8, 8);
    const Tensor x = oracle::to_tensor(in.x);
    const Tensor c = oracle::to_tensor(in.centers);
    const double o_self = oracle::self_supervised(in.x, 0.5);
    const double o_ccl = oracle::cluster_center(in.x, in.centers, in.assign, in.phis);
    const double o_cil = oracle::cluster_instance(in.x, in.assign, 0.5);
    const double o_aware = (o_ccl + o_cil) / 2.0;
    track("nt_xent_pair", s, losses::nt_xent_pair(1, 0, x, 0.5).item(),
          oracle::nt_xent_pair(in.x, 1, 0, 0.5));
    track("self_supervised", s, losses::self_supervised_loss(x, 0.5).item(), o_self);
    const Tensor ccl = losses::cluster_center_loss(x, c, in.assign, in.phis);
    const Tensor cil = losses::cluster_instance_loss(x, in.assign, 0.5).value;
    track("cluster_center", s, ccl.item(), o_ccl);
    track("cluster_instance", s, cil.item(), o_cil);
    const Tensor aware = losses::cluster_aware_loss(ccl, cil);
    track("cluster_aware", s, aware.item(), o_aware);
    track("total", s,
          losses::total_loss(losses::self_supervised_loss(x, 0.5), aware, in.lambda).item(),
          (1.0 - in.lambda) * o_self + in.lambda * o_aware);

    std::mt19937_64 rng(9000 + s);
    const oracle::Rows pts = oracle::random_rows(rng, 30, 6);
    const oracle::Rows centers = oracle::random_rows(rng, 2 + s % 5, 6);
    if (clustering::assign(oracle::to_tensor(pts), oracle::to_tensor(centers)) !=
        oracle::assign(pts, centers)) {
      ++assign_mismatch;
    }

    const oracle::Rows bank = oracle::random_rows(rng, 20, 8);
    const oracle::Row z = oracle::random_rows(rng, 1, 8)[0];
    const scoring::ReferenceBank rb(oracle::to_tensor(bank));
    const std::size_t k = 2 + s % 15;
    track("score_cos", s, scoring::score_cos(rb, z), oracle::score_cos(bank, z));
    track("score_var", s, scoring::score_var(rb, z, k).value, oracle::score_var(bank, z, k));

    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> coarse(0, 5);
    std::vector<double> id(50);
    std::vector<double> ood(50);
    for (auto& v : id) v = s % 2 ? n(rng) + 0.4 : coarse(rng);
    for (auto& v : ood) v = s % 2 ? n(rng) : coarse(rng) - 1;
    track("auroc", s, scoring::auroc(id, ood), oracle::auroc(id, ood));
  }
  return {worst < 1e-10 && assign_mismatch == 0,
          fmt("%zu instances x 10 functions, worst |diff| %.3g (%s), assign mismatches %zu, "
              "limit 1e-10",
              kInstances, worst, worst_at.c_str(), assign_mismatch)};
}

struct Probe : TrainObserver {
  std::vector<std::vector<double>> params;
  std::vector<std::size_t> refits;
  void on_refit(std::size_t epoch, const clustering::ClusterState&) override {
    refits.push_back(epoch);
  }
  void on_epoch_end(const EpochMetrics&, const model::ModelParams& p) override {
    std::vector<double> flat;
    for (const auto* t : model::parameters(p)) {
      flat.insert(flat.end(), t->values().begin(), t->values().end());
    }
    params.push_back(std::move(flat));
  }
};

double max_delta(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Verdict schedule_contract() {
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.warmup_epochs = 20;
  cfg.update_interval = 10;
  const DatasetBundle data = generate_synthetic(cfg.data, cfg.seed);
  Probe joint;
  const TrainResult r = train(cfg, data, &joint);
  TrainConfig plain = cfg;
  plain.use_ccl = false;
  plain.use_cil = false;
  Probe baseline;
  (void)train(plain, data, &baseline);

  double warm_delta = 0.0;
  for (std::size_t e = 0; e < 20; ++e) {
    warm_delta = std::max(warm_delta, max_delta(joint.params[e], baseline.params[e]));
  }
  const double joint_delta = max_delta(joint.params[20], baseline.params[20]);
  bool cluster_loss_silent = true;
  for (const auto& m : r.metrics) {
    if (m.epoch < 20 && !std::isnan(m.loss_cluster)) cluster_loss_silent = false;
  }
  const std::vector<std::size_t> want{20, 30, 40};
  const bool pass = r.refit_epochs == want && joint.refits == want && warm_delta == 0.0 &&
                    joint_delta > 0.0 && cluster_loss_silent;
  std::string epochs;
  for (auto e : r.refit_epochs) epochs += (epochs.empty() ? "" : ",") + std::to_string(e);
  return {pass, fmt("refits {%s}; max parameter delta vs cluster-free run: epochs 0-19 %.3g, "
                    "epoch 20 %.3g",
                    epochs.c_str(), warm_delta, joint_delta)};
}

const std::size_t kShifted = 0;

TrainConfig ablation_base() {
  TrainConfig cfg;
  cfg.ablate_seeds = 5;
  return cfg;
}

AblationResult ablate(const char* sweep) {
  const AblationResult r = run_ablation(ablation_base(), sweep);
  write_ablation_csv(r, out_dir() / (std::string(sweep) + ".csv"));
  for (const auto& v : r.variants) {
    std::string line = fmt("    %-14s", v.variant.c_str());
    for (std::size_t s = 0; s < v.ood_sets.size(); ++s) {
      line += fmt(" %s %.4f", v.ood_sets[s].c_str(), v.mean_auroc(s));
    }
    if (!v.center_similarity.empty()) line += fmt(" sim %.4f", v.mean_similarity());
    std::printf("%s\n", line.c_str());
  }
  std::fflush(stdout);
  return r;
}

Verdict table2_direction() {
  const AblationResult r = ablate("table2");
  const double self = r.find("self_only").mean_auroc(kShifted);
  const double ccl = r.find("self_ccl").mean_auroc(kShifted);
  const double cil = r.find("self_cil").mean_auroc(kShifted);
  const double full = r.find("full").mean_auroc(kShifted);
  return {full >= self + 0.02 && ccl >= self && cil >= self,
          fmt("shifted mean AUROC: self %.4f, +ccl %.4f, +cil %.4f, full %.4f "
              "(need full >= self + 0.02, singles >= self)",
              self, ccl, cil, full)};
}

Verdict table3_direction() {
  const AblationResult r = ablate("table3");
  const double emb = r.find("embedding").mean_auroc(kShifted);
  const double proj = r.find("projection").mean_auroc(kShifted);
  return {emb >= proj, fmt("shifted mean AUROC: embedding %.4f, projection %.4f", emb, proj)};
}

Verdict table4_direction() {
  const AblationResult r = ablate("table4");
  const double none = r.find("no_warmup_u10").mean_auroc(kShifted);
  const double u10 = r.find("warmup_u10").mean_auroc(kShifted);
  const double batch = r.find("warmup_batch").mean_auroc(kShifted);
  const double u1 = r.find("warmup_u1").mean_auroc(kShifted);
  const double u50 = r.find("warmup_u50").mean_auroc(kShifted);
  const double best = std::max({u10, batch, u1, u50});
  const bool warmup_ok = u10 >= none;
  const bool interval_ok = (u10 >= u1 && u10 >= u50) || u10 >= best - 0.01;
  return {warmup_ok && interval_ok,
          fmt("shifted mean AUROC: no-warmup %.4f, warmup U=batch %.4f, U=1 %.4f, U=10 %.4f, "
              "U=50 %.4f",
              none, batch, u1, u10, u50)};
}

Verdict table5_direction() {
  const AblationResult r = ablate("table5");
  const auto& half = r.find("r_half");
  const auto& exact = r.find("r_true");
  const auto& many = r.find("r_5x");
  const bool auroc_ok = exact.mean_auroc(kShifted) >= half.mean_auroc(kShifted) &&
                        exact.mean_auroc(kShifted) >= many.mean_auroc(kShifted);
  const bool sim_ok = exact.mean_similarity() > many.mean_similarity();
  return {auroc_ok && sim_ok,
          fmt("shifted mean AUROC: R=C/2 %.4f, R=C %.4f, R=5C %.4f; similarity R=C %.4f, "
              "R=5C %.4f",
              half.mean_auroc(kShifted), exact.mean_auroc(kShifted), many.mean_auroc(kShifted),
              exact.mean_similarity(), many.mean_similarity())};
}

Verdict score_comparison() {
  const AblationResult r = ablate("score");
  const auto& cos = r.find("cos");
  const auto& var = r.find("var");
  bool pass = true;
  std::string detail;
  for (std::size_t s = 0; s < cos.ood_sets.size(); ++s) {
    for (std::size_t seed = 0; seed < cos.auroc.size(); ++seed) {
      if (var.auroc[seed][s] < cos.auroc[seed][s] - 0.01) pass = false;
    }
    detail += fmt("%s%s var %.4f cos %.4f", detail.empty() ? "" : "; ",
                  cos.ood_sets[s].c_str(), var.mean_auroc(s), cos.mean_auroc(s));
  }
  return {pass, detail + " (need var >= cos - 0.01 for every set and seed)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  const fs::path dir = out_dir() / "determinism";
  fs::create_directories(dir);
  const TrainConfig cfg;
  const DatasetBundle data = generate_synthetic(cfg.data, cfg.seed);
  for (const char* run : {"a", "b"}) {
    const TrainResult r = train(cfg, data);
    const Checkpoint ck{r.config, r.params, r.clusters};
    save_checkpoint(ck, dir / (std::string(run) + ".ckpt"));
    write_metrics_csv(r, dir / (std::string(run) + "_metrics.csv"));
    const Checkpoint loaded = load_checkpoint(dir / (std::string(run) + ".ckpt"));
    const auto report = evaluate(loaded, data, cfg.score_kind, cfg.k_top);
    scoring::write_scores_csv(report, dir / (std::string(run) + "_scores.csv"));
    scoring::write_summary_csv(report, dir / (std::string(run) + "_summary.csv"));
  }
  std::size_t same = 0;
  const std::vector<std::string> files{".ckpt", "_metrics.csv", "_scores.csv", "_summary.csv"};
  for (const auto& f : files) {
    const std::string a = slurp(dir / ("a" + f));
    same += !a.empty() && a == slurp(dir / ("b" + f)) ? 1 : 0;
  }
  return {same == files.size(),
          fmt("%zu of %zu artifacts byte-identical (checkpoint, metrics, scores, summary)", same,
              files.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "gradient suite", 60, gradient_suite},
      {2, "oracle suite", 60, oracle_suite},
      {3, "schedule contract", 120, schedule_contract},
      {4, "loss ablation direction", 900, table2_direction},
      {5, "clustering layer direction", 600, table3_direction},
      {6, "warm-up and update interval direction", 1200, table4_direction},
      {7, "cluster count direction", 1200, table5_direction},
      {8, "variance vs cosine score", 300, score_comparison},
      {9, "determinism", 600, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    std::printf("running criterion %d: %s\n", c.id, c.title);
    std::fflush(stdout);
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = v.pass && in_budget;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s; %.1f s of %.0f s budget\n", pass ? "PASS" : "FAIL",
                c.id, c.title, v.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
