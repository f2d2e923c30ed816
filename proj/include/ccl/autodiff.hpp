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

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices of doubles.
//
// A Tensor is a value. It becomes tracked when registered on a Tape with
// Tape::leaf(); every op applied to tracked inputs records a node on the same
// tape. Ops on untracked inputs run eagerly with no recording, which is what
// the finite-difference oracle and evaluation paths use.
//
// Shapes have rank 0 (scalar), 1 or 2. Ops view a rank-0 tensor as 1x1 and a
// rank-1 tensor of length d as a 1xd row.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ccl::ad {

using Shape = std::vector<std::size_t>;
using NodeId = std::int64_t;

inline constexpr NodeId kNoNode = -1;

class Tape;

std::string shape_string(const Shape& shape);

class Tensor {
 public:
  Tensor() : shape_{0, 0} {}
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return values_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return values_; }
  // In-place access for optimizers; does not touch any tape.
  std::span<double> mutable_values() { return values_; }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }
  double item() const;

  // Row r as a copy; convenient for untracked vector work.
  std::vector<double> row(std::size_t r) const;

  bool tracked() const { return node_ != kNoNode; }
  NodeId node() const { return node_; }
  Tape* tape() const { return tape_; }

  // Same shape and values; drops tape membership.
  Tensor detached() const;

 private:
  friend class Tape;

  Shape shape_;
  std::vector<double> values_;
  Tape* tape_ = nullptr;
  NodeId node_ = kNoNode;
};

// Gradient buffers keyed by node id.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::vector<std::vector<double>> by_node)
      : by_node_(std::move(by_node)) {}

  // Gradient of the loss with respect to `t`. Zeros when the loss does not
  // depend on `t`.
  Tensor of(const Tensor& t) const;
  bool reached(const Tensor& t) const;

 private:
  std::vector<std::vector<double>> by_node_;
};

// Returns the gradient buffer of the i-th input, or an empty span when that
// input is not tracked.
using GradSink = std::function<std::span<double>(std::size_t input)>;
using BackwardFn =
    std::function<void(std::span<const double> grad_out, const GradSink&)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers `value` as a differentiable leaf.
  Tensor leaf(Tensor value);

  // Records `result` as computed from `inputs`. Untracked inputs are kept as
  // placeholders so the backward rule can index inputs positionally.
  Tensor record(Tensor result, const std::vector<const Tensor*>& inputs,
                BackwardFn backward);

  // Reverse sweep from a scalar `loss` produced on this tape.
  Gradients backward(const Tensor& loss) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<NodeId> inputs;
    std::size_t numel = 0;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Keep-mask for masked_log_softmax: keep[r * cols + c] != 0 marks entries that
// take part in the row's normalizer.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> keep;

  static Mask all(std::size_t rows, std::size_t cols);
  static Mask off_diagonal(std::size_t n);
  bool operator()(std::size_t r, std::size_t c) const {
    return keep[r * cols + c] != 0;
  }
  void set(std::size_t r, std::size_t c, bool value) {
    keep[r * cols + c] = value ? 1 : 0;
  }
};

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise with row (1xc) or column (rx1) broadcasting of `b`.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

Tensor normalize_rows(const Tensor& a);
// Matrix of s(a_i, b_j) = a_i.b_j / (|a_i| |b_j|).
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

// axis 0 reduces rows (result 1xc); axis 1 reduces columns (result rx1).
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a, int axis);
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

// out[r][c] = a[r][c] - logsumexp_{k : mask(r,k)} a[r][k], for every c
// including masked-out ones. Every row needs at least one kept entry.
Tensor masked_log_softmax(const Tensor& a, const Mask& mask);

// Max over coordinates of |analytic - central| / max(|analytic|, |central|,
// 1e-8), where analytic comes from a reverse sweep of f at x and central from
// (f(x + step e_i) - f(x - step e_i)) / (2 step) evaluated without a tape.
double finite_difference_check(
    const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
    double step);

}  // namespace ccl::ad
