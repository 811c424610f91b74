#include "postag/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace postag::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                              b.shape_string());
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::push(Tensor value, bool requires_grad, std::function<void(Tape&)> backward) {
#ifndef NDEBUG
  if (!value.all_finite()) throw std::domain_error("non-finite value produced on tape");
#endif
  Node n;
  n.own = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw std::out_of_range("variable is not on this tape");
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value(); }

Tensor& Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad_ext) {
    n.has_grad = true;
    return *n.grad_ext;
  }
  if (!n.has_grad) {
    n.grad_own = Tensor(n.value().shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad_own;
}

const Tensor& Tape::grad_of(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.grad_ext ? *n.grad_ext : n.grad_own;
}

Tensor Tape::gradient(Var v) const {
  const Node& n = node(v);
  if (!n.has_grad) return Tensor(n.value().shape(), 0.0);
  return grad_of(v.id);
}

Var Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::parameter(const Tensor& value, Tensor& grad) {
  if (value.shape() != grad.shape()) {
    throw std::invalid_argument("parameter gradient shape " + grad.shape_string() + " differs from value shape " +
                                value.shape_string());
  }
  Node n;
  n.ref = &value;
  n.grad_ext = &grad;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::reference(const Tensor& value) {
  Node n;
  n.ref = &value;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k) shape_error("matmul", A, B);
  Tensor C = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) C(i, j) += aip * B(p, j);
    }
  }
  return push(std::move(C), needs(a) || needs(b), [a, b, m, k, n, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    if (t.needs(a)) {
      Tensor& GA = t.grad(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += G(i, j) * B(p, j);
          GA(i, p) += s;
        }
    }
    if (t.needs(b)) {
      Tensor& GB = t.grad(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A(i, p);
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) GB(p, j) += aip * G(i, j);
        }
    }
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  const bool broadcast = A.shape() != B.shape();
  if (broadcast && !(B.rows() == 1 && B.cols() == A.cols())) shape_error("add", A, B);
  Tensor C = A;
  const std::size_t n = A.cols();
  for (std::size_t i = 0; i < C.size(); ++i) C[i] += broadcast ? B[i % n] : B[i];
  return push(std::move(C), needs(a) || needs(b), [a, b, broadcast, n, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    if (t.needs(a)) {
      Tensor& GA = t.grad(a);
      for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i];
    }
    if (t.needs(b)) {
      Tensor& GB = t.grad(b);
      for (std::size_t i = 0; i < G.size(); ++i) GB[broadcast ? i % n : i] += G[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.shape() != B.shape()) shape_error("mul", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
  return push(std::move(C), needs(a) || needs(b), [a, b, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    if (t.needs(a)) {
      Tensor& GA = t.grad(a);
      const Tensor& B = t.value(b);
      for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * B[i];
    }
    if (t.needs(b)) {
      Tensor& GB = t.grad(b);
      const Tensor& A = t.value(a);
      for (std::size_t i = 0; i < G.size(); ++i) GB[i] += G[i] * A[i];
    }
  });
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const std::size_t m = value(parts[0]).rows();
  std::size_t total = 0;
  bool req = false;
  for (Var p : parts) {
    if (value(p).rows() != m) shape_error("concat", value(parts[0]), value(p));
    total += value(p).cols();
    req = req || needs(p);
  }
  Tensor C = Tensor::matrix(m, total);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& P = value(p);
    for (std::size_t i = 0; i < m; ++i)
      std::copy(P.row(i).begin(), P.row(i).end(), C.row(i).begin() + static_cast<std::ptrdiff_t>(off));
    off += P.cols();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return push(std::move(C), req, [ins = std::move(ins), m, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    std::size_t off = 0;
    for (Var p : ins) {
      const std::size_t c = t.value(p).cols();
      if (t.needs(p)) {
        Tensor& GP = t.grad(p);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j) GP(i, j) += G(i, off + j);
      }
      off += c;
    }
  });
}

Var Tape::rowsum(Var a) {
  const Tensor& A = value(a);
  const std::size_t m = A.rows(), n = A.cols();
  Tensor C = Tensor::matrix(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += A(i, j);
    C[i] = s;
  }
  return push(std::move(C), needs(a), [a, m, n, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    Tensor& GA = t.grad(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) GA(i, j) += G[i];
  });
}

Var Tape::sum(Var a) {
  const Tensor& A = value(a);
  double s = 0.0;
  for (double v : A.data()) s += v;
  return push(Tensor::scalar(s), needs(a), [a, self = std::uint32_t(nodes_.size())](Tape& t) {
    const double g = t.grad_of(self)[0];
    Tensor& GA = t.grad(a);
    for (auto& v : GA.data()) v += g;
  });
}

Var Tape::scale(Var a, double factor) {
  Tensor C = value(a);
  for (auto& v : C.data()) v *= factor;
  return push(std::move(C), needs(a), [a, factor, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    Tensor& GA = t.grad(a);
    for (std::size_t i = 0; i < G.size(); ++i) GA[i] += factor * G[i];
  });
}

Var Tape::sigmoid(Var a) {
  Tensor C = value(a);
  for (auto& v : C.data()) v = sigmoid_scalar(v);
  return push(std::move(C), needs(a), [a, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    const Tensor& Y = t.nodes_[self].value();
    Tensor& GA = t.grad(a);
    for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * Y[i] * (1.0 - Y[i]);
  });
}

Var Tape::tanh(Var a) {
  Tensor C = value(a);
  for (auto& v : C.data()) v = std::tanh(v);
  return push(std::move(C), needs(a), [a, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    const Tensor& Y = t.nodes_[self].value();
    Tensor& GA = t.grad(a);
    for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * (1.0 - Y[i] * Y[i]);
  });
}

Var Tape::softmax(Var a) {
  Tensor C = value(a);
  const std::size_t m = C.rows(), n = C.cols();
  for (std::size_t i = 0; i < m; ++i) {
    auto r = C.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (auto& v : r) {
      v = std::exp(v - mx);
      z += v;
    }
    for (auto& v : r) v /= z;
  }
  return push(std::move(C), needs(a), [a, m, n, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    const Tensor& Y = t.nodes_[self].value();
    Tensor& GA = t.grad(a);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += G(i, j) * Y(i, j);
      for (std::size_t j = 0; j < n; ++j) GA(i, j) += Y(i, j) * (G(i, j) - dot);
    }
  });
}

Var Tape::embedding(Var table, std::span<const int> indices) {
  const Tensor& W = value(table);
  const std::size_t d = W.cols();
  Tensor C = Tensor::matrix(indices.size(), d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || static_cast<std::size_t>(idx) >= W.rows()) {
      throw std::out_of_range("embedding: index " + std::to_string(idx) + " outside table " + W.shape_string());
    }
    std::copy(W.row(static_cast<std::size_t>(idx)).begin(), W.row(static_cast<std::size_t>(idx)).end(),
              C.row(i).begin());
  }
  std::vector<int> idx(indices.begin(), indices.end());
  return push(std::move(C), needs(table), [table, idx = std::move(idx), d, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    Tensor& GW = t.grad(table);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) GW(static_cast<std::size_t>(idx[i]), j) += G(i, j);
  });
}

Var Tape::dropout(Var a, double p, bool train, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (!train || p == 0.0) return a;
  const Tensor& A = value(a);
  Tensor mask(A.shape(), 0.0);
  const double keep = 1.0 / (1.0 - p);
  for (auto& m : mask.data()) m = rng.uniform() < p ? 0.0 : keep;
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= mask[i];
  return push(std::move(C), needs(a), [a, mask = std::move(mask), self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    Tensor& GA = t.grad(a);
    for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * mask[i];
  });
}

Var Tape::slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Tensor& A = value(a);
  if (count == 0 || begin + count > A.cols()) {
    throw std::invalid_argument("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                ") outside " + A.shape_string());
  }
  const std::size_t m = A.rows();
  Tensor C = Tensor::matrix(m, count);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) C(i, j) = A(i, begin + j);
  return push(std::move(C), needs(a), [a, begin, count, m, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    Tensor& GA = t.grad(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j) GA(i, begin + j) += G(i, j);
  });
}

Var Tape::row(Var a, std::size_t r) {
  const Tensor& A = value(a);
  if (r >= A.rows()) throw std::out_of_range("row: index " + std::to_string(r) + " outside " + A.shape_string());
  const std::size_t n = A.cols();
  std::vector<double> data(A.row(r).begin(), A.row(r).end());
  return push(Tensor({1, n}, std::move(data)), needs(a), [a, r, n, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    Tensor& GA = t.grad(a);
    for (std::size_t j = 0; j < n; ++j) GA(r, j) += G[j];
  });
}

Var Tape::stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no inputs");
  const std::size_t n = value(rows[0]).cols();
  Tensor C = Tensor::matrix(rows.size(), n);
  bool req = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& R = value(rows[i]);
    if (R.rows() != 1 || R.cols() != n) shape_error("stack_rows", value(rows[0]), R);
    std::copy(R.data().begin(), R.data().end(), C.row(i).begin());
    req = req || needs(rows[i]);
  }
  std::vector<Var> ins(rows.begin(), rows.end());
  return push(std::move(C), req, [ins = std::move(ins), n, self = std::uint32_t(nodes_.size())](Tape& t) {
    const Tensor& G = t.grad_of(self);
    for (std::size_t i = 0; i < ins.size(); ++i) {
      if (!t.needs(ins[i])) continue;
      Tensor& GR = t.grad(ins[i]);
      for (std::size_t j = 0; j < n; ++j) GR[j] += G(i, j);
    }
  });
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const int> gold) {
  const Tensor& L = value(logits);
  const std::size_t m = L.rows(), n = L.cols();
  if (gold.size() != m) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(gold.size()) + " targets for logits " +
                                L.shape_string());
  }
  Tensor probs = L;
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const int g = gold[i];
    if (g < 0 || static_cast<std::size_t>(g) >= n) throw std::out_of_range("softmax_cross_entropy: bad target");
    auto r = probs.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (auto v : r) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    loss -= L(i, static_cast<std::size_t>(g)) - log_z;
    for (auto& v : r) v = std::exp(v - log_z);
  }
  loss /= static_cast<double>(m);
  std::vector<int> targets(gold.begin(), gold.end());
  return push(Tensor::scalar(loss), needs(logits),
              [logits, probs = std::move(probs), targets = std::move(targets), m, n,
               self = std::uint32_t(nodes_.size())](Tape& t) {
                const double g = t.grad_of(self)[0] / static_cast<double>(m);
                Tensor& GL = t.grad(logits);
                for (std::size_t i = 0; i < m; ++i)
                  for (std::size_t j = 0; j < n; ++j)
                    GL(i, j) += g * (probs(i, j) - (static_cast<int>(j) == targets[i] ? 1.0 : 0.0));
              });
}

void Tape::backward(Var loss) {
  const Tensor& L = value(loss);
  if (L.size() != 1) throw std::invalid_argument("backward: loss must be a scalar, got " + L.shape_string());
  if (!nodes_[loss.id].requires_grad) return;
  grad(loss)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.has_grad && n.backward) n.backward(*this);
  }
}

}  // namespace postag::ad
