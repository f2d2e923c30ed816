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

#include "ccl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "ccl/errors.hpp"

namespace ccl {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const char* expected) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" +
                    std::string(value) + "' as " + expected);
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  return static_cast<std::size_t>(parse_u64(key, v));
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::size_t> parse_widths(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_size(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

std::string fmt_widths(const std::vector<std::size_t>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(w[i]);
  }
  return out;
}

struct Field {
  std::string name;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, std::string_view key, std::string_view)> set;
};

#define CCL_SIZE_FIELD(key, member)                                      \
  Field {                                                                \
    key, [](const TrainConfig& c) { return std::to_string(c.member); },  \
        [](TrainConfig& c, std::string_view k, std::string_view v) {     \
          c.member = parse_size(k, v);                                   \
        }                                                                \
  }
#define CCL_DOUBLE_FIELD(key, member)                                    \
  Field {                                                                \
    key, [](const TrainConfig& c) { return fmt_double(c.member); },      \
        [](TrainConfig& c, std::string_view k, std::string_view v) {     \
          c.member = parse_double(k, v);                                 \
        }                                                                \
  }
#define CCL_BOOL_FIELD(key, member)                                      \
  Field {                                                                \
    key, [](const TrainConfig& c) { return fmt_bool(c.member); },        \
        [](TrainConfig& c, std::string_view k, std::string_view v) {     \
          c.member = parse_bool(k, v);                                   \
        }                                                                \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed", [](const TrainConfig& c) { return std::to_string(c.seed); },
            [](TrainConfig& c, std::string_view k, std::string_view v) {
              c.seed = parse_u64(k, v);
            }},
      CCL_SIZE_FIELD("dims", data.dims),
      CCL_SIZE_FIELD("components", data.components),
      CCL_SIZE_FIELD("train_per_component", data.train_per_component),
      CCL_SIZE_FIELD("test_per_component", data.test_per_component),
      CCL_SIZE_FIELD("ood_per_set", data.ood_per_set),
      CCL_DOUBLE_FIELD("component_spread", data.component_spread),
      CCL_DOUBLE_FIELD("shift_angle_deg", data.shift_angle_deg),
      CCL_DOUBLE_FIELD("scaled_covariance", data.scaled_covariance),
      CCL_DOUBLE_FIELD("interp_noise", data.interp_noise),
      CCL_DOUBLE_FIELD("aug_noise", augment.noise),
      CCL_DOUBLE_FIELD("aug_mask_prob", augment.mask_prob),
      CCL_DOUBLE_FIELD("aug_gain_min", augment.gain_min),
      CCL_DOUBLE_FIELD("aug_gain_max", augment.gain_max),
      Field{"encoder_widths",
            [](const TrainConfig& c) { return fmt_widths(c.encoder_widths); },
            [](TrainConfig& c, std::string_view k, std::string_view v) {
              c.encoder_widths = parse_widths(k, v);
            }},
      Field{"projection_widths",
            [](const TrainConfig& c) { return fmt_widths(c.projection_widths); },
            [](TrainConfig& c, std::string_view k, std::string_view v) {
              c.projection_widths = parse_widths(k, v);
            }},
      CCL_SIZE_FIELD("batch_size", batch_size),
      CCL_SIZE_FIELD("epochs", epochs),
      CCL_SIZE_FIELD("warmup_epochs", warmup_epochs),
      CCL_SIZE_FIELD("update_interval", update_interval),
      CCL_BOOL_FIELD("update_per_batch", update_per_batch),
      CCL_DOUBLE_FIELD("learning_rate", learning_rate),
      CCL_BOOL_FIELD("cosine_annealing", cosine_annealing),
      CCL_SIZE_FIELD("clusters", clusters),
      CCL_DOUBLE_FIELD("tau", loss.tau),
      CCL_DOUBLE_FIELD("alpha", loss.alpha),
      CCL_DOUBLE_FIELD("lambda", loss.lambda_weight),
      CCL_DOUBLE_FIELD("phi_floor", loss.phi_floor),
      CCL_BOOL_FIELD("denominator_includes_positive",
                     loss.denominator_includes_positive),
      Field{"clustering_layer",
            [](const TrainConfig& c) {
              return std::string(clustering::to_string(c.clustering_layer));
            },
            [](TrainConfig& c, std::string_view, std::string_view v) {
              c.clustering_layer = clustering::parse_layer(v);
            }},
      CCL_BOOL_FIELD("use_ccl", use_ccl),
      CCL_BOOL_FIELD("use_cil", use_cil),
      CCL_SIZE_FIELD("kmeans_max_iters", kmeans_max_iters),
      CCL_DOUBLE_FIELD("kmeans_tol", kmeans_tol),
      Field{"score_kind",
            [](const TrainConfig& c) {
              return std::string(scoring::to_string(c.score_kind));
            },
            [](TrainConfig& c, std::string_view, std::string_view v) {
              c.score_kind = scoring::parse_score_kind(v);
            }},
      CCL_SIZE_FIELD("k_top", k_top),
      Field{"score_layer",
            [](const TrainConfig& c) {
              return std::string(clustering::to_string(c.score_layer));
            },
            [](TrainConfig& c, std::string_view, std::string_view v) {
              c.score_layer = clustering::parse_layer(v);
            }},
      CCL_SIZE_FIELD("probe_interval", probe_interval),
      CCL_SIZE_FIELD("ablate_seeds", ablate_seeds),
  };
  return table;
}

#undef CCL_SIZE_FIELD
#undef CCL_DOUBLE_FIELD
#undef CCL_BOOL_FIELD

const Field& field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.name == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

void DatasetSpec::validate() const {
  if (dims < 2) throw ConfigError("dims must be >= 2");
  if (components < 1) throw ConfigError("components must be >= 1");
  if (components >= dims) {
    throw ConfigError("components must be below dims so shifted means can "
                      "leave the span of the ID means");
  }
  if (train_per_component < 1 || test_per_component < 1 || ood_per_set < 1) {
    throw ConfigError("sample counts must be positive");
  }
  if (!(component_spread > 0.0)) {
    throw ConfigError("component_spread must be positive");
  }
  if (!(shift_angle_deg > 0.0 && shift_angle_deg <= 180.0)) {
    throw ConfigError("shift_angle_deg must lie in (0, 180]; 0 makes the "
                      "shifted set identical to ID");
  }
  if (!(scaled_covariance > 0.0) || scaled_covariance == 1.0) {
    throw ConfigError("scaled_covariance must be positive and differ from 1; "
                      "1 makes the scaled set identical to ID");
  }
  if (components < 2) {
    throw ConfigError("interpolated OOD set needs at least two components");
  }
  if (!(interp_noise >= 0.0)) throw ConfigError("interp_noise must be >= 0");
}

void AugmentOptions::validate() const {
  if (!(noise >= 0.0)) throw ConfigError("aug_noise must be >= 0");
  if (!(mask_prob >= 0.0 && mask_prob < 1.0)) {
    throw ConfigError("aug_mask_prob must lie in [0, 1)");
  }
  if (!(gain_min > 0.0 && gain_max >= gain_min)) {
    throw ConfigError("augmentation gains need 0 < gain_min <= gain_max");
  }
}

void TrainConfig::validate() const {
  data.validate();
  augment.validate();
  model::validate(model_widths());
  loss.validate();
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (warmup_epochs > epochs) {
    throw ConfigError("warmup_epochs must not exceed epochs");
  }
  if (update_interval < 1) throw ConfigError("update_interval must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  const std::size_t r = resolved_clusters();
  if (cluster_loss_enabled()) {
    if (r < 2) throw ConfigError("clusters must be >= 2");
    if (r > data.components * data.train_per_component) {
      throw ConfigError("more clusters than training samples");
    }
  }
  if (kmeans_max_iters < 1) throw ConfigError("kmeans_max_iters must be >= 1");
  if (!(kmeans_tol >= 0.0)) throw ConfigError("kmeans_tol must be >= 0");
  if (score_kind == scoring::ScoreKind::kVar &&
      (k_top < 2 || k_top > data.components * data.train_per_component)) {
    throw ConfigError("k_top must lie in [2, training set size]");
  }
  if (ablate_seeds < 1) throw ConfigError("ablate_seeds must be >= 1");
}

model::ModelWidths TrainConfig::model_widths() const {
  model::ModelWidths w;
  w.encoder.assign(1, data.dims);
  w.encoder.insert(w.encoder.end(), encoder_widths.begin(), encoder_widths.end());
  w.projection.assign(1, encoder_widths.empty() ? 0 : encoder_widths.back());
  w.projection.insert(w.projection.end(), projection_widths.begin(),
                      projection_widths.end());
  return w;
}

clustering::ClusterSchedule TrainConfig::schedule() const {
  return clustering::ClusterSchedule{warmup_epochs, update_interval,
                                     update_per_batch};
}

void TrainConfig::set(std::string_view key, std::string_view value) {
  field(trim(key)).set(*this, trim(key), trim(value));
}

std::string TrainConfig::get(std::string_view key) const {
  return field(trim(key)).get(*this);
}

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.name);
    return out;
  }();
  return names;
}

void TrainConfig::merge_text(std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void TrainConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str());
}

std::string TrainConfig::canonical_text() const {
  std::string out;
  for (const auto& f : fields()) {
    out += f.name;
    out += " = ";
    out += f.get(*this);
    out += '\n';
  }
  return out;
}

std::uint64_t TrainConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string TrainConfig::hash_hex() const { return hex64(hash()); }

}  // namespace ccl
