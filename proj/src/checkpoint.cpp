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

#include "ccl/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ccl/errors.hpp"

namespace ccl {
namespace {

constexpr std::array<char, 8> kMagic = {'C', 'C', 'L', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  template <typename T>
  void pod(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const std::string& s) {
    pod<std::uint64_t>(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void tensor(const ad::Tensor& t) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) pod<std::uint64_t>(d);
    os_.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.numel() * sizeof(double)));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

  template <typename T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is_) fail("truncated file");
    return v;
  }
  std::string bytes() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 26)) fail("string field too large");
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    if (!is_) fail("truncated file");
    return s;
  }
  ad::Tensor tensor() {
    const auto rank = pod<std::uint32_t>();
    if (rank > 2) fail("tensor rank above 2");
    ad::Shape shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = pod<std::uint64_t>();
      n *= d;
    }
    if (n > (1u << 28)) fail("tensor too large");
    std::vector<double> values(n);
    is_.read(reinterpret_cast<char*>(values.data()),
             static_cast<std::streamsize>(n * sizeof(double)));
    if (!is_) fail("truncated file");
    return ad::Tensor(std::move(shape), std::move(values));
  }
  [[noreturn]] void fail(const std::string& what) {
    throw IoError(source_ + ": " + what);
  }

 private:
  std::istream& is_;
  std::string source_;
};

void write_layers(Writer& w, const std::vector<model::Linear>& layers) {
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    w.tensor(l.weight);
    w.tensor(l.bias);
  }
}

std::vector<model::Linear> read_layers(Reader& r) {
  const auto n = r.pod<std::uint32_t>();
  if (n > 1024) r.fail("implausible layer count");
  std::vector<model::Linear> layers;
  for (std::uint32_t i = 0; i < n; ++i) {
    model::Linear l;
    l.weight = r.tensor();
    l.bias = r.tensor();
    layers.push_back(std::move(l));
  }
  return layers;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  std::ostringstream buf(std::ios::binary);
  Writer w(buf);
  buf.write(kMagic.data(), kMagic.size());
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.pod<std::uint64_t>(checkpoint.config.hash());
  w.bytes(checkpoint.config.canonical_text());
  write_layers(w, checkpoint.params.encoder.layers);
  write_layers(w, checkpoint.params.projection.layers);
  w.pod<std::uint8_t>(checkpoint.clusters ? 1 : 0);
  if (checkpoint.clusters) {
    const auto& c = *checkpoint.clusters;
    w.pod<std::uint32_t>(c.layer == clustering::Layer::kEmbedding ? 0 : 1);
    w.pod<std::int64_t>(c.updated_at_epoch);
    w.tensor(c.centers);
    w.pod<std::uint64_t>(c.assignments.size());
    for (int a : c.assignments) w.pod<std::int32_t>(a);
    w.pod<std::uint64_t>(c.phis.size());
    for (double p : c.phis) w.pod<double>(p);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  const std::string bytes = buf.str();
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  Reader r(is, path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) r.fail("not a checkpoint file");
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version));
  }
  const auto stored_hash = r.pod<std::uint64_t>();
  Checkpoint ck;
  ck.config.merge_text(r.bytes());
  if (ck.config.hash() != stored_hash) r.fail("config hash mismatch");
  ck.params.encoder.layers = read_layers(r);
  ck.params.projection.layers = read_layers(r);
  if (r.pod<std::uint8_t>() != 0) {
    clustering::ClusterState c;
    c.layer = r.pod<std::uint32_t>() == 0 ? clustering::Layer::kEmbedding
                                          : clustering::Layer::kProjection;
    c.updated_at_epoch = r.pod<std::int64_t>();
    c.centers = r.tensor();
    const auto na = r.pod<std::uint64_t>();
    if (na > (1u << 28)) r.fail("assignment count too large");
    c.assignments.resize(na);
    for (auto& a : c.assignments) a = r.pod<std::int32_t>();
    const auto np = r.pod<std::uint64_t>();
    if (np != c.centers.rows()) r.fail("concentration count mismatch");
    c.phis.resize(np);
    for (auto& p : c.phis) p = r.pod<double>();
    ck.clusters = std::move(c);
  }
  model::validate(model::widths_of(ck.params));
  return ck;
}

}  // namespace ccl
