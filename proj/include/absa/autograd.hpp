#pragma once

// Minimal reverse-mode autodiff over dynamically sized Eigen matrices.
// A Tape owns the graph; ops append nodes eagerly and record a backward
// closure. Node ids are stable under vector growth, so closures capture ids,
// never references. One tape per forward pass; parameters enter as leaves.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace absa::ad {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
class Tape;

template <class S>
struct Var {
  Tape<S>* tape = nullptr;
  int id = -1;
};

template <class S>
class Tape {
 public:
  using Mat = Matrix<S>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<S> constant(Mat value) { return push(std::move(value), false, {}); }
  Var<S> leaf(Mat value) { return push(std::move(value), true, {}); }

  const Mat& value(Var<S> v) const { return nodes_[v.id].value; }
  const Mat& grad(Var<S> v) const { return nodes_[v.id].grad; }
  bool needs_grad(Var<S> v) const { return nodes_[v.id].needs_grad; }

  // Seeds d(root)/d(root) = 1 and sweeps the graph in reverse creation
  // order, which is a topological order by construction.
  void backward(Var<S> root) {
    if (value(root).size() != 1)
      throw std::invalid_argument("backward: root must be a 1x1 scalar node");
    for (auto& n : nodes_)
      if (n.needs_grad) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    nodes_[root.id].grad(0, 0) = S(1);
    for (int i = root.id; i >= 0; --i)
      if (nodes_[i].needs_grad && nodes_[i].backprop) nodes_[i].backprop();
  }

  // ---- ops ----

  Var<S> matmul(Var<S> a, Var<S> b) {
    check(a), check(b);
    Mat v = value(a) * value(b);
    return unary_or_binary(std::move(v), a, b, [this](int out, int ia, int ib) {
      const Mat& g = nodes_[out].grad;
      if (nodes_[ia].needs_grad) nodes_[ia].grad.noalias() += g * nodes_[ib].value.transpose();
      if (nodes_[ib].needs_grad) nodes_[ib].grad.noalias() += nodes_[ia].value.transpose() * g;
    });
  }

  // a * b^T
  Var<S> matmul_nt(Var<S> a, Var<S> b) {
    check(a), check(b);
    Mat v = value(a) * value(b).transpose();
    return unary_or_binary(std::move(v), a, b, [this](int out, int ia, int ib) {
      const Mat& g = nodes_[out].grad;
      if (nodes_[ia].needs_grad) nodes_[ia].grad.noalias() += g * nodes_[ib].value;
      if (nodes_[ib].needs_grad) nodes_[ib].grad.noalias() += g.transpose() * nodes_[ia].value;
    });
  }

  Var<S> add(Var<S> a, Var<S> b) {
    check(a), check(b);
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
      throw std::invalid_argument("add: shape mismatch");
    Mat v = value(a) + value(b);
    return unary_or_binary(std::move(v), a, b, [this](int out, int ia, int ib) {
      const Mat& g = nodes_[out].grad;
      if (nodes_[ia].needs_grad) nodes_[ia].grad += g;
      if (nodes_[ib].needs_grad) nodes_[ib].grad += g;
    });
  }

  // a (m x n) + row vector b (1 x n) broadcast over rows
  Var<S> add_rowvec(Var<S> a, Var<S> b) {
    check(a), check(b);
    if (value(b).rows() != 1 || value(a).cols() != value(b).cols())
      throw std::invalid_argument("add_rowvec: b must be 1 x cols(a)");
    Mat v = value(a).rowwise() + value(b).row(0);
    return unary_or_binary(std::move(v), a, b, [this](int out, int ia, int ib) {
      const Mat& g = nodes_[out].grad;
      if (nodes_[ia].needs_grad) nodes_[ia].grad += g;
      if (nodes_[ib].needs_grad) nodes_[ib].grad.row(0) += g.colwise().sum();
    });
  }

  Var<S> scale(Var<S> a, S c) {
    check(a);
    Mat v = value(a) * c;
    return unary(std::move(v), a, [this, c](int out, int ia) {
      nodes_[ia].grad += nodes_[out].grad * c;
    });
  }

  // alpha * a + beta * b
  Var<S> axpby(S alpha, Var<S> a, S beta, Var<S> b) {
    check(a), check(b);
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
      throw std::invalid_argument("axpby: shape mismatch");
    Mat v = alpha * value(a) + beta * value(b);
    return unary_or_binary(std::move(v), a, b, [this, alpha, beta](int out, int ia, int ib) {
      const Mat& g = nodes_[out].grad;
      if (nodes_[ia].needs_grad) nodes_[ia].grad += alpha * g;
      if (nodes_[ib].needs_grad) nodes_[ib].grad += beta * g;
    });
  }

  // elementwise add of a fixed matrix (attention masks and the like)
  Var<S> add_const(Var<S> a, Mat m) {
    check(a);
    if (value(a).rows() != m.rows() || value(a).cols() != m.cols())
      throw std::invalid_argument("add_const: shape mismatch");
    Mat v = value(a) + m;
    return unary(std::move(v), a,
                 [this](int out, int ia) { nodes_[ia].grad += nodes_[out].grad; });
  }

  Var<S> row_softmax(Var<S> a) {
    check(a);
    Mat v = value(a);
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      auto row = v.row(r);
      const S m = row.maxCoeff();
      row = (row.array() - m).exp();
      row /= row.sum();
    }
    Mat saved = v;
    return unary(std::move(v), a, [this, saved](int out, int ia) {
      const Mat& g = nodes_[out].grad;
      for (Eigen::Index r = 0; r < saved.rows(); ++r) {
        const S dot = g.row(r).dot(saved.row(r));
        nodes_[ia].grad.row(r).array() +=
            saved.row(r).array() * (g.row(r).array() - dot);
      }
    });
  }

  Var<S> gelu(Var<S> a) {
    check(a);
    const S inv_sqrt2 = S(1) / std::sqrt(S(2));
    const S inv_sqrt2pi = S(1) / std::sqrt(S(2) * std::numbers::pi_v<S>);
    Mat x = value(a);
    Mat v = x.unaryExpr([&](S t) {
      return S(0.5) * t * (S(1) + std::erf(t * inv_sqrt2));
    });
    return unary(std::move(v), a, [this, x, inv_sqrt2, inv_sqrt2pi](int out, int ia) {
      Mat d = x.unaryExpr([&](S t) {
        const S cdf = S(0.5) * (S(1) + std::erf(t * inv_sqrt2));
        const S pdf = inv_sqrt2pi * std::exp(S(-0.5) * t * t);
        return cdf + t * pdf;
      });
      nodes_[ia].grad.array() += nodes_[out].grad.array() * d.array();
    });
  }

  // row-wise layer norm with learned gain/bias (1 x d each)
  Var<S> layer_norm(Var<S> a, Var<S> gain, Var<S> bias, S eps = S(1e-5)) {
    check(a), check(gain), check(bias);
    const auto d = value(a).cols();
    if (value(gain).rows() != 1 || value(gain).cols() != d || value(bias).rows() != 1 ||
        value(bias).cols() != d)
      throw std::invalid_argument("layer_norm: gain/bias must be 1 x d");
    Mat xhat(value(a).rows(), d);
    Mat inv_std(value(a).rows(), 1);
    for (Eigen::Index r = 0; r < value(a).rows(); ++r) {
      const auto row = value(a).row(r);
      const S mu = row.mean();
      const S var = (row.array() - mu).square().mean();
      const S is = S(1) / std::sqrt(var + eps);
      inv_std(r, 0) = is;
      xhat.row(r) = (row.array() - mu) * is;
    }
    Mat v = (xhat.array().rowwise() * value(gain).row(0).array()).rowwise() +
            value(bias).row(0).array();
    const int ig = gain.id, ib = bias.id;
    return node3(std::move(v), a, gain, bias,
                 [this, xhat, inv_std, ig, ib](int out, int ia) {
      const Mat& g = nodes_[out].grad;
      if (nodes_[ib].needs_grad) nodes_[ib].grad.row(0) += g.colwise().sum();
      if (nodes_[ig].needs_grad)
        nodes_[ig].grad.row(0) += (g.array() * xhat.array()).colwise().sum().matrix();
      if (nodes_[ia].needs_grad) {
        for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
          // dy scaled by gain, then the standard layer-norm pullback
          Eigen::Array<S, 1, Eigen::Dynamic> dy =
              g.row(r).array() * nodes_[ig].value.row(0).array();
          const S mean_dy = dy.mean();
          const S mean_dy_xhat = (dy * xhat.row(r).array()).mean();
          nodes_[ia].grad.row(r).array() +=
              (dy - mean_dy - xhat.row(r).array() * mean_dy_xhat) * inv_std(r, 0);
        }
      }
    });
  }

  // rows of a parameter table selected by index; backward scatter-adds
  Var<S> gather_rows(Var<S> table, std::vector<int> ids) {
    check(table);
    Mat v(static_cast<Eigen::Index>(ids.size()), value(table).cols());
    for (size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || ids[i] >= value(table).rows())
        throw std::out_of_range("gather_rows: id out of range");
      v.row(static_cast<Eigen::Index>(i)) = value(table).row(ids[i]);
    }
    return unary(std::move(v), table, [this, ids](int out, int it) {
      const Mat& g = nodes_[out].grad;
      for (size_t i = 0; i < ids.size(); ++i)
        nodes_[it].grad.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    });
  }

  Var<S> slice_rows(Var<S> a, int offset, int count) {
    check(a);
    if (offset < 0 || count < 0 || offset + count > value(a).rows())
      throw std::out_of_range("slice_rows: bad range");
    Mat v = value(a).middleRows(offset, count);
    return unary(std::move(v), a, [this, offset, count](int out, int ia) {
      nodes_[ia].grad.middleRows(offset, count) += nodes_[out].grad;
    });
  }

  Var<S> slice_cols(Var<S> a, int offset, int count) {
    check(a);
    if (offset < 0 || count < 0 || offset + count > value(a).cols())
      throw std::out_of_range("slice_cols: bad range");
    Mat v = value(a).middleCols(offset, count);
    return unary(std::move(v), a, [this, offset, count](int out, int ia) {
      nodes_[ia].grad.middleCols(offset, count) += nodes_[out].grad;
    });
  }

  Var<S> concat_rows(const std::vector<Var<S>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    Eigen::Index rows = 0;
    const Eigen::Index cols = value(parts[0]).cols();
    for (auto p : parts) {
      check(p);
      if (value(p).cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
      rows += value(p).rows();
    }
    Mat v(rows, cols);
    Eigen::Index at = 0;
    std::vector<int> ids;
    std::vector<Eigen::Index> offs;
    bool any = false;
    for (auto p : parts) {
      v.middleRows(at, value(p).rows()) = value(p);
      ids.push_back(p.id);
      offs.push_back(at);
      at += value(p).rows();
      any = any || nodes_[p.id].needs_grad;
    }
    if (!any) return constant(std::move(v));
    return push(std::move(v), true, [this, ids, offs](int out) {
      const Mat& g = nodes_[out].grad;
      for (size_t i = 0; i < ids.size(); ++i)
        if (nodes_[ids[i]].needs_grad)
          nodes_[ids[i]].grad += g.middleRows(offs[i], nodes_[ids[i]].value.rows());
    });
  }

  Var<S> concat_cols(const std::vector<Var<S>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
    const Eigen::Index rows = value(parts[0]).rows();
    Eigen::Index cols = 0;
    for (auto p : parts) {
      check(p);
      if (value(p).rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
      cols += value(p).cols();
    }
    Mat v(rows, cols);
    Eigen::Index at = 0;
    std::vector<int> ids;
    std::vector<Eigen::Index> offs;
    bool any = false;
    for (auto p : parts) {
      v.middleCols(at, value(p).cols()) = value(p);
      ids.push_back(p.id);
      offs.push_back(at);
      at += value(p).cols();
      any = any || nodes_[p.id].needs_grad;
    }
    if (!any) return constant(std::move(v));
    return push(std::move(v), true, [this, ids, offs](int out) {
      const Mat& g = nodes_[out].grad;
      for (size_t i = 0; i < ids.size(); ++i)
        if (nodes_[ids[i]].needs_grad)
          nodes_[ids[i]].grad += g.middleCols(offs[i], nodes_[ids[i]].value.cols());
    });
  }

  // inverted dropout; the mask is sampled once and reused in backward
  Var<S> dropout(Var<S> a, double p, std::mt19937_64& rng) {
    check(a);
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0, 1)");
    if (p == 0.0) return a;
    std::bernoulli_distribution keep(1.0 - p);
    Mat mask(value(a).rows(), value(a).cols());
    const S scale_up = S(1.0 / (1.0 - p));
    for (Eigen::Index r = 0; r < mask.rows(); ++r)
      for (Eigen::Index c = 0; c < mask.cols(); ++c)
        mask(r, c) = keep(rng) ? scale_up : S(0);
    Mat v = value(a).array() * mask.array();
    return unary(std::move(v), a, [this, mask](int out, int ia) {
      nodes_[ia].grad.array() += nodes_[out].grad.array() * mask.array();
    });
  }

  // sum over rows of -log softmax(logits)[target]; stable via max shift
  Var<S> nll_rows(Var<S> logits, std::vector<int> targets) {
    check(logits);
    const auto rows = value(logits).rows();
    if (static_cast<Eigen::Index>(targets.size()) != rows)
      throw std::invalid_argument("nll_rows: one target per row required");
    Mat probs(rows, value(logits).cols());
    S total = S(0);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (targets[r] < 0 || targets[r] >= value(logits).cols())
        throw std::out_of_range("nll_rows: target out of range");
      const auto row = value(logits).row(r);
      const S m = row.maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (row.array() - m).exp();
      const S z = e.sum();
      probs.row(r) = (e / z).matrix();
      total -= std::log(probs(r, targets[r]));
    }
    Mat v(1, 1);
    v(0, 0) = total;
    return unary(std::move(v), logits, [this, probs, targets](int out, int il) {
      const S g = nodes_[out].grad(0, 0);
      Mat d = probs;
      for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, targets[r]) -= S(1);
      nodes_[il].grad += g * d;
    });
  }

  // <w, a> summed over all entries, as a 1x1 node
  Var<S> weighted_sum(Var<S> a, Mat w) {
    check(a);
    if (value(a).rows() != w.rows() || value(a).cols() != w.cols())
      throw std::invalid_argument("weighted_sum: shape mismatch");
    Mat v(1, 1);
    v(0, 0) = (value(a).array() * w.array()).sum();
    return unary(std::move(v), a, [this, w](int out, int ia) {
      nodes_[ia].grad += nodes_[out].grad(0, 0) * w;
    });
  }

  Var<S> sum_all(const std::vector<Var<S>>& parts) {
    if (parts.empty()) throw std::invalid_argument("sum_all: no parts");
    Mat v(1, 1);
    v(0, 0) = S(0);
    std::vector<int> ids;
    bool any = false;
    for (auto p : parts) {
      check(p);
      if (value(p).size() != 1) throw std::invalid_argument("sum_all: parts must be 1x1");
      v(0, 0) += value(p)(0, 0);
      ids.push_back(p.id);
      any = any || nodes_[p.id].needs_grad;
    }
    if (!any) return constant(std::move(v));
    return push(std::move(v), true, [this, ids](int out) {
      for (int id : ids)
        if (nodes_[id].needs_grad) nodes_[id].grad(0, 0) += nodes_[out].grad(0, 0);
    });
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void()> backprop;
    bool needs_grad = false;
  };

  void check(Var<S> v) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
      throw std::invalid_argument("variable does not belong to this tape");
  }

  Var<S> push(Mat value, bool needs_grad, std::function<void(int)> backprop) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    const int id = static_cast<int>(nodes_.size());
    if (backprop) n.backprop = [fn = std::move(backprop), id]() { fn(id); };
    nodes_.push_back(std::move(n));
    return {this, id};
  }

  template <class F>
  Var<S> unary(Mat value, Var<S> a, F&& fn) {
    if (!nodes_[a.id].needs_grad) return constant(std::move(value));
    const int ia = a.id;
    return push(std::move(value), true,
                [fn = std::forward<F>(fn), ia](int out) { fn(out, ia); });
  }

  template <class F>
  Var<S> unary_or_binary(Mat value, Var<S> a, Var<S> b, F&& fn) {
    if (!nodes_[a.id].needs_grad && !nodes_[b.id].needs_grad)
      return constant(std::move(value));
    const int ia = a.id, ib = b.id;
    return push(std::move(value), true,
                [fn = std::forward<F>(fn), ia, ib](int out) { fn(out, ia, ib); });
  }

  template <class F>
  Var<S> node3(Mat value, Var<S> a, Var<S> b, Var<S> c, F&& fn) {
    if (!nodes_[a.id].needs_grad && !nodes_[b.id].needs_grad && !nodes_[c.id].needs_grad)
      return constant(std::move(value));
    const int ia = a.id;
    return push(std::move(value), true,
                [fn = std::forward<F>(fn), ia](int out) { fn(out, ia); });
  }

  std::vector<Node> nodes_;
};

}  // namespace absa::ad
