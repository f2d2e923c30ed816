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

#include "ccl/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ccl/errors.hpp"

namespace ccl::ad {
namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void check_finite(const Tensor& t, const char* op) {
#ifndef NDEBUG
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite value in result");
    }
  }
#else
  (void)t;
  (void)op;
#endif
}

Tape* common_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->tracked()) continue;
    if (tape != nullptr && tape != t->tape()) {
      throw ContractError("operands are tracked on different tapes");
    }
    tape = t->tape();
  }
  return tape;
}

// Records `result` when any input is tracked, otherwise returns it as is.
Tensor finish(const char* op, Tensor result,
              std::initializer_list<const Tensor*> inputs,
              BackwardFn backward) {
  check_finite(result, op);
  Tape* tape = common_tape(inputs);
  if (tape == nullptr) return result;
  return tape->record(std::move(result), std::vector<const Tensor*>(inputs),
                      std::move(backward));
}

enum class Broadcast { kNone, kRow, kColumn };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kNone;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::kColumn;
  throw DimensionError(std::string(op) + ": shapes " +
                       shape_string(a.shape()) + " and " +
                       shape_string(b.shape()) + " do not conform");
}

std::size_t broadcast_index(Broadcast kind, std::size_t r, std::size_t c,
                            std::size_t cols) {
  switch (kind) {
    case Broadcast::kRow:
      return c;
    case Broadcast::kColumn:
      return r;
    case Broadcast::kNone:
    default:
      return r * cols + c;
  }
}

enum class Elementwise { kAdd, kSub, kMul };

Tensor elementwise(const char* op, Elementwise kind, const Tensor& a,
                   const Tensor& b) {
  const Broadcast bc = broadcast_kind(op, a, b);
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  std::vector<double> out(a.numel());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      const double y = bv[broadcast_index(bc, r, c, cols)];
      switch (kind) {
        case Elementwise::kAdd:
          out[i] = av[i] + y;
          break;
        case Elementwise::kSub:
          out[i] = av[i] - y;
          break;
        case Elementwise::kMul:
          out[i] = av[i] * y;
          break;
      }
    }
  }
  std::vector<double> a_copy;
  std::vector<double> b_copy;
  if (kind == Elementwise::kMul) {
    a_copy.assign(av.begin(), av.end());
    b_copy.assign(bv.begin(), bv.end());
  }
  return finish(
      op, Tensor(a.shape(), std::move(out)), {&a, &b},
      [kind, bc, rows, cols, a_copy = std::move(a_copy),
       b_copy = std::move(b_copy)](std::span<const double> g,
                                   const GradSink& sink) {
        auto ga = sink(0);
        auto gb = sink(1);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i = r * cols + c;
            const std::size_t j = broadcast_index(bc, r, c, cols);
            switch (kind) {
              case Elementwise::kAdd:
                if (!ga.empty()) ga[i] += g[i];
                if (!gb.empty()) gb[j] += g[i];
                break;
              case Elementwise::kSub:
                if (!ga.empty()) ga[i] += g[i];
                if (!gb.empty()) gb[j] -= g[i];
                break;
              case Elementwise::kMul:
                if (!ga.empty()) ga[i] += g[i] * b_copy[j];
                if (!gb.empty()) gb[j] += g[i] * a_copy[i];
                break;
            }
          }
        }
      });
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.size() > 2) {
    throw DimensionError("tensor rank above 2: " + shape_string(shape_));
  }
  if (product(shape_) != values_.size()) {
    throw DimensionError("shape " + shape_string(shape_) + " holds " +
                         std::to_string(product(shape_)) +
                         " values, got " + std::to_string(values_.size()));
  }
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const { return rank() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  return 1;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item() on tensor of shape " + shape_string(shape_));
  }
  return values_[0];
}

std::vector<double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return {values_.begin() + static_cast<std::ptrdiff_t>(r * c),
          values_.begin() + static_cast<std::ptrdiff_t>((r + 1) * c)};
}

Tensor Tensor::detached() const { return Tensor(shape_, values_); }

// ---------------------------------------------------------------------------
// Gradients / Tape

Tensor Gradients::of(const Tensor& t) const {
  if (reached(t)) {
    return Tensor(t.shape(), by_node_[static_cast<std::size_t>(t.node())]);
  }
  return Tensor::zeros(t.shape());
}

bool Gradients::reached(const Tensor& t) const {
  if (!t.tracked()) return false;
  const auto id = static_cast<std::size_t>(t.node());
  return id < by_node_.size() && !by_node_[id].empty();
}

Tensor Tape::leaf(Tensor value) {
  Tensor t = value.detached();
  t.tape_ = this;
  t.node_ = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{{}, t.numel(), {}});
  return t;
}

Tensor Tape::record(Tensor result, const std::vector<const Tensor*>& inputs,
                    BackwardFn backward) {
  Node node;
  node.numel = result.numel();
  node.backward = std::move(backward);
  for (const Tensor* in : inputs) {
    if (in->tracked() && in->tape() != this) {
      throw ContractError("input tracked on a different tape");
    }
    node.inputs.push_back(in->tracked() ? in->node() : kNoNode);
  }
  result.tape_ = this;
  result.node_ = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(node));
  return result;
}

Gradients Tape::backward(const Tensor& loss) const {
  if (loss.numel() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  if (!loss.tracked() || loss.tape() != this) {
    throw ContractError("loss was not produced on this tape");
  }
  std::vector<std::vector<double>> grads(nodes_.size());
  const auto start = static_cast<std::size_t>(loss.node());
  grads[start].assign(1, 1.0);
  for (std::size_t k = start + 1; k-- > 0;) {
    const Node& node = nodes_[k];
    if (grads[k].empty() || !node.backward) continue;
    GradSink sink = [&](std::size_t which) -> std::span<double> {
      const NodeId id = node.inputs.at(which);
      if (id == kNoNode) return {};
      auto& buf = grads[static_cast<std::size_t>(id)];
      if (buf.empty()) buf.assign(nodes_[static_cast<std::size_t>(id)].numel, 0.0);
      return buf;
    };
    node.backward(grads[k], sink);
  }
  return Gradients(std::move(grads));
}

Mask Mask::all(std::size_t rows, std::size_t cols) {
  return Mask{rows, cols, std::vector<std::uint8_t>(rows * cols, 1)};
}

Mask Mask::off_diagonal(std::size_t n) {
  Mask m = all(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, false);
  return m;
}

// ---------------------------------------------------------------------------
// Ops

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shapes " + shape_string(a.shape()) +
                         " and " + shape_string(b.shape()) +
                         " do not conform");
  }
  const std::size_t n = a.rows();
  const std::size_t k = a.cols();
  const std::size_t m = b.cols();
  std::vector<double> av(a.values().begin(), a.values().end());
  std::vector<double> bv(b.values().begin(), b.values().end());
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double* brow = &bv[p * m];
      double* orow = &out[i * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += x * brow[j];
    }
  }
  return finish("matmul", Tensor::matrix(n, m, std::move(out)), {&a, &b},
                [n, k, m, av = std::move(av), bv = std::move(bv)](
                    std::span<const double> g, const GradSink& sink) {
                  auto ga = sink(0);
                  if (!ga.empty()) {
                    // dA = G B^T
                    for (std::size_t i = 0; i < n; ++i) {
                      for (std::size_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < m; ++j) {
                          acc += g[i * m + j] * bv[p * m + j];
                        }
                        ga[i * k + p] += acc;
                      }
                    }
                  }
                  auto gb = sink(1);
                  if (!gb.empty()) {
                    // dB = A^T G
                    for (std::size_t i = 0; i < n; ++i) {
                      for (std::size_t p = 0; p < k; ++p) {
                        const double x = av[i * k + p];
                        if (x == 0.0) continue;
                        for (std::size_t j = 0; j < m; ++j) {
                          gb[p * m + j] += x * g[i * m + j];
                        }
                      }
                    }
                  }
                });
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  std::vector<double> out(a.numel());
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  }
  return finish("transpose", Tensor::matrix(c, r, std::move(out)), {&a},
                [r, c](std::span<const double> g, const GradSink& sink) {
                  auto ga = sink(0);
                  if (ga.empty()) return;
                  for (std::size_t i = 0; i < r; ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                      ga[i * c + j] += g[j * r + i];
                    }
                  }
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise("add", Elementwise::kAdd, a, b);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise("sub", Elementwise::kSub, a, b);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise("mul", Elementwise::kMul, a, b);
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= factor;
  return finish("scale", Tensor(a.shape(), std::move(out)), {&a},
                [factor](std::span<const double> g, const GradSink& sink) {
                  auto ga = sink(0);
                  if (ga.empty()) return;
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += factor * g[i];
                  }
                });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  std::vector<double> kept = out;
  return finish("relu", Tensor(a.shape(), std::move(out)), {&a},
                [kept = std::move(kept)](std::span<const double> g,
                                         const GradSink& sink) {
                  auto ga = sink(0);
                  if (ga.empty()) return;
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    if (kept[i] > 0.0) ga[i] += g[i];
                  }
                });
}

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v = std::exp(v);
  std::vector<double> y = out;
  return finish("exp", Tensor(a.shape(), std::move(out)), {&a},
                [y = std::move(y)](std::span<const double> g,
                                   const GradSink& sink) {
                  auto ga = sink(0);
                  if (ga.empty()) return;
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * y[i];
                  }
                });
}

Tensor log(const Tensor& a) {
  std::vector<double> x(a.values().begin(), a.values().end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      throw DomainError("log: non-positive value " + std::to_string(x[i]) +
                        " at index " + std::to_string(i));
    }
    out[i] = std::log(x[i]);
  }
  return finish("log", Tensor(a.shape(), std::move(out)), {&a},
                [x = std::move(x)](std::span<const double> g,
                                   const GradSink& sink) {
                  auto ga = sink(0);
                  if (ga.empty()) return;
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] / x[i];
                  }
                });
}

Tensor normalize_rows(const Tensor& a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  auto av = a.values();
  std::vector<double> out(a.numel());
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < c; ++j) ss += av[i * c + j] * av[i * c + j];
    norms[i] = std::sqrt(ss);
    if (!(norms[i] > 0.0)) {
      throw DomainError("normalize_rows: row " + std::to_string(i) +
                        " has zero norm");
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = av[i * c + j] / norms[i];
  }
  std::vector<double> y = out;
  return finish(
      "normalize_rows", Tensor(a.shape(), std::move(out)), {&a},
      [r, c, y = std::move(y), norms = std::move(norms)](
          std::span<const double> g, const GradSink& sink) {
        auto ga = sink(0);
        if (ga.empty()) return;
        // d(x/|x|) = (g - y (y.g)) / |x|
        for (std::size_t i = 0; i < r; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < c; ++j) dot += y[i * c + j] * g[i * c + j];
          for (std::size_t j = 0; j < c; ++j) {
            ga[i * c + j] += (g[i * c + j] - y[i * c + j] * dot) / norms[i];
          }
        }
      });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("cosine_similarity: shapes " +
                         shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " do not conform");
  }
  return matmul(normalize_rows(a), transpose(normalize_rows(b)));
}

Tensor sum(const Tensor& a, int axis) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  auto av = a.values();
  if (axis == 0) {
    std::vector<double> out(c, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) out[j] += av[i * c + j];
    }
    return finish("sum", Tensor::matrix(1, c, std::move(out)), {&a},
                  [r, c](std::span<const double> g, const GradSink& sink) {
                    auto ga = sink(0);
                    if (ga.empty()) return;
                    for (std::size_t i = 0; i < r; ++i) {
                      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j];
                    }
                  });
  }
  if (axis == 1) {
    std::vector<double> out(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) out[i] += av[i * c + j];
    }
    return finish("sum", Tensor::matrix(r, 1, std::move(out)), {&a},
                  [r, c](std::span<const double> g, const GradSink& sink) {
                    auto ga = sink(0);
                    if (ga.empty()) return;
                    for (std::size_t i = 0; i < r; ++i) {
                      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[i];
                    }
                  });
  }
  throw ContractError("sum: axis must be 0 or 1, got " + std::to_string(axis));
}

Tensor mean(const Tensor& a, int axis) {
  const std::size_t n = axis == 0 ? a.rows() : a.cols();
  if (n == 0) throw ContractError("mean over an empty axis");
  return scale(sum(a, axis), 1.0 / static_cast<double>(n));
}

Tensor sum_all(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return finish("sum_all", Tensor::scalar(total), {&a},
                [](std::span<const double> g, const GradSink& sink) {
                  auto ga = sink(0);
                  for (double& v : ga) v += g[0];
                });
}

Tensor mean_all(const Tensor& a) {
  if (a.numel() == 0) throw ContractError("mean of an empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor masked_log_softmax(const Tensor& a, const Mask& mask) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  if (mask.rows != r || mask.cols != c || mask.keep.size() != r * c) {
    throw DimensionError("masked_log_softmax: mask " +
                         shape_string({mask.rows, mask.cols}) +
                         " does not match " + shape_string(a.shape()));
  }
  auto av = a.values();
  std::vector<double> out(a.numel());
  // Softmax over kept entries; zero elsewhere. Needed by the backward rule.
  std::vector<double> soft(a.numel(), 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) {
      if (mask(i, j)) hi = std::max(hi, av[i * c + j]);
    }
    if (hi == -std::numeric_limits<double>::infinity()) {
      throw ContractError("masked_log_softmax: row " + std::to_string(i) +
                          " has no kept entries");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (mask(i, j)) acc += std::exp(av[i * c + j] - hi);
    }
    const double lse = hi + std::log(acc);
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = av[i * c + j] - lse;
      if (mask(i, j)) soft[i * c + j] = std::exp(out[i * c + j]);
    }
  }
  return finish("masked_log_softmax", Tensor(a.shape(), std::move(out)), {&a},
                [r, c, soft = std::move(soft)](std::span<const double> g,
                                               const GradSink& sink) {
                  auto ga = sink(0);
                  if (ga.empty()) return;
                  for (std::size_t i = 0; i < r; ++i) {
                    double gsum = 0.0;
                    for (std::size_t j = 0; j < c; ++j) gsum += g[i * c + j];
                    for (std::size_t j = 0; j < c; ++j) {
                      ga[i * c + j] += g[i * c + j] - soft[i * c + j] * gsum;
                    }
                  }
                });
}

double finite_difference_check(
    const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
    double step) {
  Tape tape;
  Tensor leaf = tape.leaf(x);
  Tensor y = f(leaf);
  std::vector<double> analytic(x.numel(), 0.0);
  if (y.tracked()) {
    Tensor g = tape.backward(y).of(leaf);
    analytic.assign(g.values().begin(), g.values().end());
  } else if (y.numel() != 1) {
    throw ContractError("finite_difference_check: f must return a scalar");
  }

  const Tensor base = x.detached();
  double worst = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    std::vector<double> plus(base.values().begin(), base.values().end());
    std::vector<double> minus = plus;
    plus[i] += step;
    minus[i] -= step;
    const double fp = f(Tensor(x.shape(), std::move(plus))).item();
    const double fm = f(Tensor(x.shape(), std::move(minus))).item();
    const double central = (fp - fm) / (2.0 * step);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(central), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - central) / denom);
  }
  return worst;
}

}  // namespace ccl::ad
