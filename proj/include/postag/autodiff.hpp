// Reverse-mode differentiation over a tape of matrix operations. Nodes are
// appended in execution order, so reverse insertion order is a valid
// topological order for the backward sweep.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "postag/random.hpp"
#include "postag/tensor.hpp"

namespace postag::ad {

struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf without gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient accumulates into `grad` (same shape as `value`).
  /// Both must outlive the tape; `value` is referenced, not copied.
  Var parameter(const Tensor& value, Tensor& grad);
  /// Leaf without gradient that references `value` instead of copying it.
  Var reference(const Tensor& value);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() target with respect to `v`; zeros if
  /// `v` received none.
  Tensor gradient(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  /// Elementwise sum; `b` may also be a single row broadcast over a's rows.
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }
  /// Sum over the last axis: (m x n) -> (m x 1).
  Var rowsum(Var a);
  /// Sum of all entries: -> scalar.
  Var sum(Var a);
  Var scale(Var a, double factor);
  Var sigmoid(Var a);
  Var tanh(Var a);
  /// Row-wise softmax with max-shift stabilization.
  Var softmax(Var a);
  /// Rows `indices` of `table`.
  Var embedding(Var table, std::span<const int> indices);
  /// Inverted dropout: survivors are scaled by 1/(1-p). Identity when
  /// !train or p == 0, in which case no random numbers are drawn.
  Var dropout(Var a, double p, bool train, Rng& rng);
  Var slice_cols(Var a, std::size_t begin, std::size_t count);
  Var row(Var a, std::size_t r);
  Var stack_rows(std::span<const Var> rows);
  /// Mean over rows of -log softmax(logits)[r, gold[r]].
  Var softmax_cross_entropy(Var logits, std::span<const int> gold);

  /// Back-propagates from scalar `loss`; throws if `loss` is not a scalar.
  void backward(Var loss);

 private:
  struct Node {
    Tensor own;
    const Tensor* ref = nullptr;
    Tensor grad_own;
    Tensor* grad_ext = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
    std::function<void(Tape&)> backward;

    const Tensor& value() const { return ref ? *ref : own; }
  };

  Var push(Tensor value, bool requires_grad, std::function<void(Tape&)> backward);
  const Node& node(Var v) const;
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient buffer of `v`, zero-initialized on first use.
  Tensor& grad(Var v);
  const Tensor& grad_of(std::uint32_t id) const;

  std::vector<Node> nodes_;
};

}  // namespace postag::ad
