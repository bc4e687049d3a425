//===- tensor.hpp - Dense tensors with reverse-mode autodiff ----*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Minimal tape-based autodiff over dense row-major Eigen matrices, templated
// on the scalar so the same backward rules run in float for training and in
// double for finite-difference verification. Every op is a free function that
// records its backward rule on the output node.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "irperf/graph.hpp"
#include "irperf/rng.hpp"

namespace irperf {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
class Tensor;

template <typename S>
struct TensorNode {
  Mat<S> value;
  Mat<S> grad;  // allocated on first accumulation
  bool requires_grad = false;
  bool has_grad = false;
  std::string name;  // set for parameters; used by checkpoints
  std::vector<Tensor<S>> parents;
  std::function<void(TensorNode<S> &)> backward;
};

template <typename S>
class Tensor {
public:
  Tensor() = default;

  static Tensor leaf(Mat<S> value, bool requires_grad = false) {
    Tensor t;
    t.n_ = std::make_shared<TensorNode<S>>();
    t.n_->value = std::move(value);
    t.n_->requires_grad = requires_grad;
    return t;
  }

  static Tensor scalar(S v) {
    Mat<S> m(1, 1);
    m(0, 0) = v;
    return leaf(std::move(m));
  }

  bool valid() const { return n_ != nullptr; }
  const Mat<S> &value() const { return n_->value; }
  Mat<S> &value() { return n_->value; }
  const Mat<S> &grad() const {
    if (!n_->has_grad) throw Error("tensor has no gradient");
    return n_->grad;
  }
  bool hasGrad() const { return n_ && n_->has_grad; }
  bool requiresGrad() const { return n_ && n_->requires_grad; }
  Eigen::Index rows() const { return n_->value.rows(); }
  Eigen::Index cols() const { return n_->value.cols(); }
  const std::string &name() const { return n_->name; }
  void setName(const std::string &name) { n_->name = name; }

  void zeroGrad() {
    n_->has_grad = false;
    n_->grad.resize(0, 0);
  }

  TensorNode<S> *node() const { return n_.get(); }

  // Internal: builds an op result. Parents/backward recorded only when some
  // input needs gradients.
  static Tensor op(Mat<S> value, std::vector<Tensor> parents,
                   std::function<void(TensorNode<S> &)> backward) {
    Tensor t;
    t.n_ = std::make_shared<TensorNode<S>>();
    t.n_->value = std::move(value);
    bool needs = false;
    for (const Tensor &p : parents)
      if (p.n_->requires_grad) needs = true;
    t.n_->requires_grad = needs;
    if (needs) {
      t.n_->parents = std::move(parents);
      t.n_->backward = std::move(backward);
    }
    return t;
  }

  static void accum(TensorNode<S> &n, const Mat<S> &g) {
    if (!n.requires_grad) return;
    if (!n.has_grad) {
      n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
      n.has_grad = true;
    }
    n.grad += g;
  }

private:
  std::shared_ptr<TensorNode<S>> n_;
};

namespace detail {

template <typename S>
void checkSameShape(const Tensor<S> &a, const Tensor<S> &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(std::string(op) + ": shape mismatch (" +
                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                " vs " + std::to_string(b.rows()) + "x" +
                std::to_string(b.cols()) + ")");
}

// Matrix product whose per-row bit pattern does not depend on the row's
// position. Stock gemm handles rows in full panels and remainder panels with
// different micro-kernels, so the same row can round differently after a
// permutation of the operand rows. Padding the left operand with zero rows up
// to a panel multiple keeps every real row on the full-panel path, which makes
// permuting the input rows permute the output rows exactly.
template <typename S>
Mat<S> rowStableProduct(const Mat<S> &a, const Mat<S> &b) {
  constexpr Eigen::Index kPanel = 8;
  const Eigen::Index n = a.rows();
  if (n % kPanel == 0) return a * b;
  const Eigen::Index np = (n + kPanel - 1) / kPanel * kPanel;
  Mat<S> ap = Mat<S>::Zero(np, a.cols());
  ap.topRows(n) = a;
  Mat<S> cp = ap * b;
  return cp.topRows(n);
}

}  // namespace detail

//===----------------------------------------------------------------------===//
// Elementwise and linear ops
//===----------------------------------------------------------------------===//

template <typename S>
Tensor<S> matmul(const Tensor<S> &a, const Tensor<S> &b) {
  if (a.cols() != b.rows())
    throw Error("matmul: shape mismatch (" + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                "x" + std::to_string(b.cols()) + ")");
  Mat<S> v = detail::rowStableProduct(a.value(), b.value());
  return Tensor<S>::op(std::move(v), {a, b}, [](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node(), *pb = n.parents[1].node();
    if (pa->requires_grad)
      Tensor<S>::accum(*pa, n.grad * pb->value.transpose());
    if (pb->requires_grad)
      Tensor<S>::accum(*pb, pa->value.transpose() * n.grad);
  });
}

/// add with row-vector (1xC) and scalar (1x1) broadcast on either side.
template <typename S>
Tensor<S> add(const Tensor<S> &a, const Tensor<S> &b) {
  Mat<S> v;
  if (b.rows() == 1 && b.cols() == 1 && !(a.rows() == 1 && a.cols() == 1)) {
    v = a.value().array() + b.value()(0, 0);
  } else if (b.rows() == 1 && a.rows() > 1 && b.cols() == a.cols()) {
    v = a.value().rowwise() + b.value().row(0);
  } else {
    detail::checkSameShape(a, b, "add");
    v = a.value() + b.value();
  }
  return Tensor<S>::op(std::move(v), {a, b}, [](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node(), *pb = n.parents[1].node();
    if (pa->requires_grad) Tensor<S>::accum(*pa, n.grad);
    if (pb->requires_grad) {
      if (pb->value.rows() == n.grad.rows() && pb->value.cols() == n.grad.cols())
        Tensor<S>::accum(*pb, n.grad);
      else if (pb->value.rows() == 1 && pb->value.cols() == 1) {
        Mat<S> g(1, 1);
        g(0, 0) = n.grad.sum();
        Tensor<S>::accum(*pb, g);
      } else {
        Tensor<S>::accum(*pb, n.grad.colwise().sum());
      }
    }
  });
}

template <typename S>
Tensor<S> sub(const Tensor<S> &a, const Tensor<S> &b) {
  detail::checkSameShape(a, b, "sub");
  Mat<S> v = a.value() - b.value();
  return Tensor<S>::op(std::move(v), {a, b}, [](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node(), *pb = n.parents[1].node();
    if (pa->requires_grad) Tensor<S>::accum(*pa, n.grad);
    if (pb->requires_grad) Tensor<S>::accum(*pb, -n.grad);
  });
}

/// Elementwise product; b may be 1x1.
template <typename S>
Tensor<S> mul(const Tensor<S> &a, const Tensor<S> &b) {
  Mat<S> v;
  bool scalar_b = b.rows() == 1 && b.cols() == 1 && !(a.rows() == 1 && a.cols() == 1);
  if (scalar_b)
    v = a.value() * b.value()(0, 0);
  else {
    detail::checkSameShape(a, b, "mul");
    v = a.value().cwiseProduct(b.value());
  }
  return Tensor<S>::op(std::move(v), {a, b}, [scalar_b](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node(), *pb = n.parents[1].node();
    if (scalar_b) {
      if (pa->requires_grad) Tensor<S>::accum(*pa, n.grad * pb->value(0, 0));
      if (pb->requires_grad) {
        Mat<S> g(1, 1);
        g(0, 0) = n.grad.cwiseProduct(pa->value).sum();
        Tensor<S>::accum(*pb, g);
      }
    } else {
      if (pa->requires_grad)
        Tensor<S>::accum(*pa, n.grad.cwiseProduct(pb->value));
      if (pb->requires_grad)
        Tensor<S>::accum(*pb, n.grad.cwiseProduct(pa->value));
    }
  });
}

template <typename S>
Tensor<S> scale(const Tensor<S> &a, S c) {
  Mat<S> v = a.value() * c;
  return Tensor<S>::op(std::move(v), {a}, [c](TensorNode<S> &n) {
    Tensor<S>::accum(*n.parents[0].node(), n.grad * c);
  });
}

/// Scales row i by the constant w[i] (degree normalization and the like).
template <typename S>
Tensor<S> rowScale(const Tensor<S> &a, std::vector<S> w) {
  if (static_cast<Eigen::Index>(w.size()) != a.rows())
    throw Error("rowScale: weight count " + std::to_string(w.size()) +
                " != rows " + std::to_string(a.rows()));
  Mat<S> v = a.value();
  for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i) *= w[i];
  return Tensor<S>::op(std::move(v), {a},
                       [w = std::move(w)](TensorNode<S> &n) {
                         Mat<S> g = n.grad;
                         for (Eigen::Index i = 0; i < g.rows(); ++i)
                           g.row(i) *= w[i];
                         Tensor<S>::accum(*n.parents[0].node(), g);
                       });
}

template <typename S>
Tensor<S> relu(const Tensor<S> &a) {
  Mat<S> v = a.value().cwiseMax(S(0));
  return Tensor<S>::op(std::move(v), {a}, [](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node();
    Mat<S> g =
        ((pa->value.array() > S(0)).template cast<S>() * n.grad.array())
            .matrix();
    Tensor<S>::accum(*pa, g);
  });
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S> &a) {
  Mat<S> v = (S(1) / (S(1) + (-a.value().array()).exp())).matrix();
  return Tensor<S>::op(v, {a}, [v](TensorNode<S> &n) {
    Mat<S> g =
        (v.array() * (S(1) - v.array())).matrix().cwiseProduct(n.grad);
    Tensor<S>::accum(*n.parents[0].node(), g);
  });
}

template <typename S>
Tensor<S> logt(const Tensor<S> &a) {
  if ((a.value().array() <= S(0)).any())
    throw Error("log: non-positive input");
  Mat<S> v = a.value().array().log().matrix();
  return Tensor<S>::op(std::move(v), {a}, [](TensorNode<S> &n) {
    Tensor<S>::accum(*n.parents[0].node(),
                     n.grad.cwiseQuotient(n.parents[0].node()->value));
  });
}

template <typename S>
Tensor<S> sqrtt(const Tensor<S> &a) {
  if ((a.value().array() < S(0)).any()) throw Error("sqrt: negative input");
  // Coefficient loop instead of Eigen's array sqrt: Eigen's fast-math packet
  // sqrt is an rsqrt approximation whose rounding differs from the scalar
  // tail, making results depend on each coefficient's position in the flat
  // array. Hardware sqrt is correctly rounded, so this loop (vectorized or
  // not) gives position-independent bits.
  Mat<S> v = a.value();
  S *data = v.data();
  for (Eigen::Index i = 0, sz = v.size(); i < sz; ++i)
    data[i] = std::sqrt(data[i]);
  return Tensor<S>::op(v, {a}, [v](TensorNode<S> &n) {
    Mat<S> denom = (v.array() * S(2)).cwiseMax(S(1e-12)).matrix();
    Tensor<S>::accum(*n.parents[0].node(), n.grad.cwiseQuotient(denom));
  });
}

template <typename S>
Tensor<S> abst(const Tensor<S> &a) {
  Mat<S> v = a.value().cwiseAbs();
  return Tensor<S>::op(std::move(v), {a}, [](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node();
    Mat<S> sign = pa->value.array().sign().matrix();
    Tensor<S>::accum(*pa, n.grad.cwiseProduct(sign));
  });
}

//===----------------------------------------------------------------------===//
// Reductions (scalar results; accumulation in double for long reductions)
//===----------------------------------------------------------------------===//

template <typename S>
Tensor<S> sum(const Tensor<S> &a) {
  Mat<S> v(1, 1);
  v(0, 0) = static_cast<S>(a.value().template cast<double>().sum());
  return Tensor<S>::op(std::move(v), {a}, [](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node();
    Tensor<S>::accum(*pa, Mat<S>::Constant(pa->value.rows(), pa->value.cols(),
                                           n.grad(0, 0)));
  });
}

template <typename S>
Tensor<S> mean(const Tensor<S> &a) {
  const double count = static_cast<double>(a.rows() * a.cols());
  if (count == 0) throw Error("mean: empty tensor");
  Mat<S> v(1, 1);
  v(0, 0) = static_cast<S>(a.value().template cast<double>().sum() / count);
  return Tensor<S>::op(std::move(v), {a}, [count](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node();
    Tensor<S>::accum(*pa, Mat<S>::Constant(pa->value.rows(), pa->value.cols(),
                                           n.grad(0, 0) / static_cast<S>(count)));
  });
}

template <typename S>
Tensor<S> maxv(const Tensor<S> &a) {
  Eigen::Index r, c;
  S m = a.value().maxCoeff(&r, &c);
  Mat<S> v(1, 1);
  v(0, 0) = m;
  return Tensor<S>::op(std::move(v), {a}, [r, c](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node();
    Mat<S> g = Mat<S>::Zero(pa->value.rows(), pa->value.cols());
    g(r, c) = n.grad(0, 0);
    Tensor<S>::accum(*pa, g);
  });
}

template <typename S>
Tensor<S> minv(const Tensor<S> &a) {
  Eigen::Index r, c;
  S m = a.value().minCoeff(&r, &c);
  Mat<S> v(1, 1);
  v(0, 0) = m;
  return Tensor<S>::op(std::move(v), {a}, [r, c](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node();
    Mat<S> g = Mat<S>::Zero(pa->value.rows(), pa->value.cols());
    g(r, c) = n.grad(0, 0);
    Tensor<S>::accum(*pa, g);
  });
}

/// Population standard deviation over all elements.
template <typename S>
Tensor<S> stddev(const Tensor<S> &a) {
  const double count = static_cast<double>(a.rows() * a.cols());
  if (count == 0) throw Error("stddev: empty tensor");
  double mu = a.value().template cast<double>().sum() / count;
  double var =
      (a.value().template cast<double>().array() - mu).square().sum() / count;
  double sd = std::sqrt(var);
  Mat<S> v(1, 1);
  v(0, 0) = static_cast<S>(sd);
  return Tensor<S>::op(std::move(v), {a}, [count, mu, sd](TensorNode<S> &n) {
    TensorNode<S> *pa = n.parents[0].node();
    double denom = std::max(sd * count, 1e-12);
    Mat<S> g = ((pa->value.template cast<double>().array() - mu) / denom *
                static_cast<double>(n.grad(0, 0)))
                   .matrix()
                   .template cast<S>();
    Tensor<S>::accum(*pa, g);
  });
}

//===----------------------------------------------------------------------===//
// Structure ops: concat / gather / segment aggregation
//===----------------------------------------------------------------------===//

template <typename S>
Tensor<S> concatCols(const std::vector<Tensor<S>> &parts) {
  if (parts.empty()) throw Error("concatCols: no inputs");
  Eigen::Index rows = parts[0].rows(), cols = 0;
  for (const Tensor<S> &p : parts) {
    if (p.rows() != rows) throw Error("concatCols: row mismatch");
    cols += p.cols();
  }
  Mat<S> v(rows, cols);
  Eigen::Index at = 0;
  std::vector<Eigen::Index> widths;
  for (const Tensor<S> &p : parts) {
    v.middleCols(at, p.cols()) = p.value();
    widths.push_back(p.cols());
    at += p.cols();
  }
  return Tensor<S>::op(std::move(v), parts,
                       [widths = std::move(widths)](TensorNode<S> &n) {
                         Eigen::Index at = 0;
                         for (size_t i = 0; i < n.parents.size(); ++i) {
                           TensorNode<S> *p = n.parents[i].node();
                           if (p->requires_grad)
                             Tensor<S>::accum(*p, n.grad.middleCols(at, widths[i]));
                           at += widths[i];
                         }
                       });
}

/// out.row(i) = a.row(index[i]).
template <typename S>
Tensor<S> indexSelect(const Tensor<S> &a, std::vector<int> index) {
  Mat<S> v(static_cast<Eigen::Index>(index.size()), a.cols());
  for (size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= a.rows())
      throw Error("indexSelect: index out of range");
    v.row(static_cast<Eigen::Index>(i)) = a.value().row(index[i]);
  }
  return Tensor<S>::op(std::move(v), {a},
                       [index = std::move(index)](TensorNode<S> &n) {
                         TensorNode<S> *pa = n.parents[0].node();
                         Mat<S> g = Mat<S>::Zero(pa->value.rows(), pa->value.cols());
                         for (size_t i = 0; i < index.size(); ++i)
                           g.row(index[i]) += n.grad.row(static_cast<Eigen::Index>(i));
                         Tensor<S>::accum(*pa, g);
                       });
}

/// Segment sum: out.row(index[i]) += values.row(i); out has `segments` rows.
template <typename S>
Tensor<S> scatterAdd(const Tensor<S> &values, std::vector<int> index,
                     int segments) {
  if (static_cast<Eigen::Index>(index.size()) != values.rows())
    throw Error("scatterAdd: index count != rows");
  Mat<S> v = Mat<S>::Zero(segments, values.cols());
  for (size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= segments)
      throw Error("scatterAdd: segment index out of range");
    v.row(index[i]) += values.value().row(static_cast<Eigen::Index>(i));
  }
  return Tensor<S>::op(std::move(v), {values},
                       [index = std::move(index)](TensorNode<S> &n) {
                         TensorNode<S> *pv = n.parents[0].node();
                         Mat<S> g(pv->value.rows(), pv->value.cols());
                         for (size_t i = 0; i < index.size(); ++i)
                           g.row(static_cast<Eigen::Index>(i)) = n.grad.row(index[i]);
                         Tensor<S>::accum(*pv, g);
                       });
}

namespace detail {

/// Shared forward/backward for segment max/min. Empty segments produce zero
/// rows and route no gradient.
template <typename S, bool kMax>
Tensor<S> segmentExtreme(const Tensor<S> &values, std::vector<int> index,
                         int segments) {
  if (static_cast<Eigen::Index>(index.size()) != values.rows())
    throw Error("segmentExtreme: index count != rows");
  const Eigen::Index cols = values.cols();
  Mat<S> v = Mat<S>::Zero(segments, cols);
  // arg(seg, col) = contributing input row, or -1.
  std::vector<int> arg(static_cast<size_t>(segments) * cols, -1);
  for (size_t i = 0; i < index.size(); ++i) {
    int s = index[i];
    if (s < 0 || s >= segments)
      throw Error("segmentExtreme: segment index out of range");
    for (Eigen::Index c = 0; c < cols; ++c) {
      S x = values.value()(static_cast<Eigen::Index>(i), c);
      int &a = arg[static_cast<size_t>(s) * cols + c];
      S &cur = v(s, c);
      if (a < 0 || (kMax ? x > cur : x < cur)) {
        cur = x;
        a = static_cast<int>(i);
      }
    }
  }
  return Tensor<S>::op(std::move(v), {values},
                       [arg = std::move(arg), cols](TensorNode<S> &n) {
                         TensorNode<S> *pv = n.parents[0].node();
                         Mat<S> g = Mat<S>::Zero(pv->value.rows(), pv->value.cols());
                         for (Eigen::Index s = 0; s < n.grad.rows(); ++s)
                           for (Eigen::Index c = 0; c < cols; ++c) {
                             int a = arg[static_cast<size_t>(s) * cols + c];
                             if (a >= 0) g(a, c) += n.grad(s, c);
                           }
                         Tensor<S>::accum(*pv, g);
                       });
}

}  // namespace detail

template <typename S>
Tensor<S> segmentMax(const Tensor<S> &values, std::vector<int> index,
                     int segments) {
  return detail::segmentExtreme<S, true>(values, std::move(index), segments);
}

template <typename S>
Tensor<S> segmentMin(const Tensor<S> &values, std::vector<int> index,
                     int segments) {
  return detail::segmentExtreme<S, false>(values, std::move(index), segments);
}

/// Inverted-dropout mask drawn from `rng`; identity when p == 0.
template <typename S>
Tensor<S> dropout(const Tensor<S> &a, double p, Rng &rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw Error("dropout: p must be < 1");
  Mat<S> mask(a.rows(), a.cols());
  const S keep = static_cast<S>(1.0 / (1.0 - p));
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      mask(i, j) = rng.chance(p) ? S(0) : keep;
  Mat<S> v = a.value().cwiseProduct(mask);
  return Tensor<S>::op(std::move(v), {a},
                       [mask = std::move(mask)](TensorNode<S> &n) {
                         Tensor<S>::accum(*n.parents[0].node(),
                                          n.grad.cwiseProduct(mask));
                       });
}

/// Numerically stable sigmoid cross-entropy per element; `targets` is a
/// constant matrix of 0/1.
template <typename S>
Tensor<S> sigmoidCrossEntropy(const Tensor<S> &logits, Mat<S> targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols())
    throw Error("sigmoidCrossEntropy: target shape mismatch");
  const auto &x = logits.value().array();
  Mat<S> v = (x.cwiseMax(S(0)) - x * targets.array() +
              ((-x.abs()).exp() + S(1)).log())
                 .matrix();
  return Tensor<S>::op(std::move(v), {logits},
                       [targets = std::move(targets)](TensorNode<S> &n) {
                         TensorNode<S> *pl = n.parents[0].node();
                         Mat<S> sig =
                             (S(1) / (S(1) + (-pl->value.array()).exp())).matrix();
                         Tensor<S>::accum(*pl,
                                          (sig - targets).cwiseProduct(n.grad));
                       });
}

//===----------------------------------------------------------------------===//
// Backward pass
//===----------------------------------------------------------------------===//

template <typename S>
void backward(const Tensor<S> &loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw Error("backward: loss must be scalar, got " +
                std::to_string(loss.rows()) + "x" + std::to_string(loss.cols()));
  // Iterative post-order DFS over the tape.
  std::vector<TensorNode<S> *> order;
  std::unordered_set<TensorNode<S> *> visited;
  std::vector<std::pair<TensorNode<S> *, size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  visited.insert(loss.node());
  while (!stack.empty()) {
    auto &[node, cursor] = stack.back();
    if (cursor < node->parents.size()) {
      TensorNode<S> *p = node->parents[cursor++].node();
      if (!visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  Mat<S> seed(1, 1);
  seed(0, 0) = S(1);
  Tensor<S>::accum(*loss.node(), seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode<S> *n = *it;
    if (n->backward && n->has_grad) n->backward(*n);
  }
}

//===----------------------------------------------------------------------===//
// Parameters and Adam
//===----------------------------------------------------------------------===//

/// Glorot-uniform weight init; biases are zero-initialized by callers.
template <typename S>
Tensor<S> glorotParam(Eigen::Index rows, Eigen::Index cols, Rng &rng,
                      const std::string &name) {
  double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat<S> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = static_cast<S>((rng.real() * 2.0 - 1.0) * a);
  Tensor<S> t = Tensor<S>::leaf(std::move(m), /*requires_grad=*/true);
  t.setName(name);
  return t;
}

template <typename S>
Tensor<S> zeroParam(Eigen::Index rows, Eigen::Index cols,
                    const std::string &name) {
  Tensor<S> t = Tensor<S>::leaf(Mat<S>::Zero(rows, cols), true);
  t.setName(name);
  return t;
}

template <typename S>
struct AdamState {
  S lr = S(1e-3);
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);
  long step = 0;
  std::vector<Mat<S>> m, v;
};

/// One Adam update with bias correction; clears gradients afterwards.
template <typename S>
void adamStep(std::vector<Tensor<S>> &params, AdamState<S> &state) {
  if (state.m.empty()) {
    for (const Tensor<S> &p : params) {
      state.m.push_back(Mat<S>::Zero(p.rows(), p.cols()));
      state.v.push_back(Mat<S>::Zero(p.rows(), p.cols()));
    }
  }
  if (state.m.size() != params.size())
    throw Error("adamStep: parameter count changed");
  ++state.step;
  const S bc1 = S(1) - static_cast<S>(std::pow(static_cast<double>(state.beta1),
                                               static_cast<double>(state.step)));
  const S bc2 = S(1) - static_cast<S>(std::pow(static_cast<double>(state.beta2),
                                               static_cast<double>(state.step)));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor<S> &p = params[i];
    if (!p.hasGrad())
      throw Error("adamStep: missing gradient on parameter '" + p.name() + "'");
    const Mat<S> &g = p.grad();
    state.m[i] = state.beta1 * state.m[i] + (S(1) - state.beta1) * g;
    state.v[i] =
        (state.beta2 * state.v[i].array() + (S(1) - state.beta2) * g.array().square())
            .matrix();
    Mat<S> mhat = state.m[i] / bc1;
    Mat<S> vhat = state.v[i] / bc2;
    p.value().array() -=
        state.lr * mhat.array() / (vhat.array().sqrt() + state.eps);
    p.zeroGrad();
  }
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace irperf
