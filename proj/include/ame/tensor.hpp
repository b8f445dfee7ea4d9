#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ame/common.hpp"

namespace ame::nn {

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

/// Dense 64-bit float tensor with a lazily allocated gradient buffer.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until ensure_grad()

  static Tensor zeros(std::vector<int> shape) {
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(t.numel(), 0.0);
    return t;
  }
  static Tensor vector(int n) { return zeros({n}); }
  static Tensor matrix(int rows, int cols) { return zeros({rows, cols}); }

  int numel() const {
    int n = 1;
    for (int d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// Handle to a value recorded on a Tape.
struct Val {
  int id = -1;
  bool valid() const { return id >= 0; }
};

namespace detail {

inline double sigmoid_stable(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Reverse-mode tape. One forward pass per tape; backward() propagates into
/// every reachable parameter leaf and then clears the recording.
class Tape {
 public:
  // ----- leaves -----

  /// Registers a parameter leaf. Gradients accumulate into t.grad on
  /// backward(). The same Tensor maps to one leaf per tape.
  Val param(Tensor& t) {
    auto it = param_vals_.find(&t);
    if (it != param_vals_.end()) return it->second;
    Node n;
    n.op = Op::Leaf;
    n.shape = t.shape;
    n.val = t.data;
    n.bound = &t;
    Val v = push(std::move(n));
    param_vals_[&t] = v;
    return v;
  }

  Val input(std::vector<double> data, std::vector<int> shape) {
    Node n;
    n.op = Op::Leaf;
    n.shape = std::move(shape);
    n.val = std::move(data);
    return push(std::move(n));
  }
  Val input_vec(std::vector<double> v) {
    int d = static_cast<int>(v.size());
    return input(std::move(v), {d});
  }
  Val scalar(double v) { return input({v}, {1}); }

  // ----- ops -----

  Val matmul(Val W, Val x) {
    const Node &w = node(W), &v = node(x);
    if (w.shape.size() != 2 || v.shape.size() != 1 || w.shape[1] != static_cast<int>(v.val.size()))
      throw ShapeMismatchError("matmul: " + shape_str(w.shape) + " vs " + shape_str(v.shape));
    Node n;
    n.op = Op::MatMul;
    n.inputs = {W.id, x.id};
    n.shape = {w.shape[0]};
    n.val.assign(w.shape[0], 0.0);
    const int rows = w.shape[0], cols = w.shape[1];
    for (int i = 0; i < rows; ++i) {
      const double* wr = w.val.data() + static_cast<std::size_t>(i) * cols;
      double acc = 0.0;
      for (int j = 0; j < cols; ++j) acc += wr[j] * v.val[j];
      n.val[i] = acc;
    }
    return push(std::move(n));
  }

  Val add(Val a, Val b) {
    const Node &x = node(a), &y = node(b);
    if (x.val.size() != y.val.size())
      throw ShapeMismatchError("add: " + shape_str(x.shape) + " vs " + shape_str(y.shape));
    Node n;
    n.op = Op::Add;
    n.inputs = {a.id, b.id};
    n.shape = x.shape;
    n.val.resize(x.val.size());
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = x.val[i] + y.val[i];
    return push(std::move(n));
  }

  Val mul(Val a, Val b) {
    const Node &x = node(a), &y = node(b);
    if (x.val.size() != y.val.size())
      throw ShapeMismatchError("mul: " + shape_str(x.shape) + " vs " + shape_str(y.shape));
    Node n;
    n.op = Op::Mul;
    n.inputs = {a.id, b.id};
    n.shape = x.shape;
    n.val.resize(x.val.size());
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = x.val[i] * y.val[i];
    return push(std::move(n));
  }

  Val concat(const std::vector<Val>& parts) {
    Node n;
    n.op = Op::Concat;
    std::size_t total = 0;
    for (Val p : parts) {
      n.inputs.push_back(p.id);
      total += node(p).val.size();
    }
    n.val.reserve(total);
    for (Val p : parts)
      n.val.insert(n.val.end(), node(p).val.begin(), node(p).val.end());
    n.shape = {static_cast<int>(total)};
    return push(std::move(n));
  }

  Val relu(Val a) { return unary(a, Op::Relu, [](double x) { return x > 0 ? x : 0.0; }); }

  Val sigmoid(Val a) {
    return unary(a, Op::Sigmoid, [](double x) { return detail::sigmoid_stable(x); });
  }

  Val tanh_(Val a) { return unary(a, Op::Tanh, [](double x) { return std::tanh(x); }); }

  Val log_(Val a) { return unary(a, Op::Log, [](double x) { return std::log(x); }); }

  Val softmax(Val a) {
    const Node& x = node(a);
    Node n;
    n.op = Op::Softmax;
    n.inputs = {a.id};
    n.shape = x.shape;
    n.val.resize(x.val.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : x.val) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.val.size(); ++i) {
      n.val[i] = std::exp(x.val[i] - mx);
      sum += n.val[i];
    }
    for (double& v : n.val) v /= sum;
    return push(std::move(n));
  }

  /// Elementwise sum of same-shape values (e.g. the sum over graph nodes).
  Val sum(const std::vector<Val>& items) {
    if (items.empty()) throw ShapeMismatchError("sum: empty operand list");
    Node n;
    n.op = Op::Sum;
    n.shape = node(items[0]).shape;
    n.val.assign(node(items[0]).val.size(), 0.0);
    for (Val v : items) {
      const Node& x = node(v);
      if (x.val.size() != n.val.size())
        throw ShapeMismatchError("sum: " + shape_str(n.shape) + " vs " + shape_str(x.shape));
      n.inputs.push_back(v.id);
      for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] += x.val[i];
    }
    return push(std::move(n));
  }

  Val inner(Val a, Val b) {
    const Node &x = node(a), &y = node(b);
    if (x.val.size() != y.val.size())
      throw ShapeMismatchError("inner: " + shape_str(x.shape) + " vs " + shape_str(y.shape));
    Node n;
    n.op = Op::Inner;
    n.inputs = {a.id, b.id};
    n.shape = {1};
    double acc = 0.0;
    for (std::size_t i = 0; i < x.val.size(); ++i) acc += x.val[i] * y.val[i];
    n.val = {acc};
    return push(std::move(n));
  }

  Val scale(Val a, double c) {
    const Node& x = node(a);
    Node n;
    n.op = Op::Scale;
    n.inputs = {a.id};
    n.shape = x.shape;
    n.aux = c;
    n.val.resize(x.val.size());
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = c * x.val[i];
    return push(std::move(n));
  }

  /// r-th row of a matrix (used for learned embedding lookups).
  Val row(Val M, int r) {
    const Node& m = node(M);
    if (m.shape.size() != 2 || r < 0 || r >= m.shape[0])
      throw ShapeMismatchError("row " + std::to_string(r) + " of " + shape_str(m.shape));
    Node n;
    n.op = Op::Row;
    n.inputs = {M.id};
    n.iaux = r;
    int cols = m.shape[1];
    n.shape = {cols};
    n.val.assign(m.val.begin() + static_cast<std::size_t>(r) * cols,
                 m.val.begin() + static_cast<std::size_t>(r + 1) * cols);
    return push(std::move(n));
  }

  /// Gated mix (1-z)*h + z*ht, the recurrent cell update.
  Val lerp_gate(Val z, Val h, Val ht) {
    const Node &zn = node(z), &hn = node(h), &tn = node(ht);
    if (zn.val.size() != hn.val.size() || hn.val.size() != tn.val.size())
      throw ShapeMismatchError("lerp_gate: " + shape_str(zn.shape) + " vs " +
                               shape_str(hn.shape) + " vs " + shape_str(tn.shape));
    Node n;
    n.op = Op::LerpGate;
    n.inputs = {z.id, h.id, ht.id};
    n.shape = hn.shape;
    n.val.resize(hn.val.size());
    for (std::size_t i = 0; i < n.val.size(); ++i)
      n.val[i] = (1.0 - zn.val[i]) * hn.val[i] + zn.val[i] * tn.val[i];
    return push(std::move(n));
  }

  /// Numerically stable binary cross-entropy on a logit:
  /// max(z,0) - z*y + log(1 + exp(-|z|)).
  Val bce_with_logits(Val logit, double target) {
    const Node& x = node(logit);
    if (x.val.size() != 1)
      throw ShapeMismatchError("bce_with_logits expects a scalar logit, got " +
                               shape_str(x.shape));
    Node n;
    n.op = Op::BceLogits;
    n.inputs = {logit.id};
    n.aux = target;
    n.shape = {1};
    double z = x.val[0];
    n.val = {std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::fabs(z)))};
    return push(std::move(n));
  }

  // ----- inspection -----

  const std::vector<double>& value(Val v) const { return node(v).val; }
  const std::vector<int>& shape(Val v) const { return node(v).shape; }
  double scalar_value(Val v) const {
    const Node& n = node(v);
    if (n.val.size() != 1) throw ShapeMismatchError("expected scalar, got " + shape_str(n.shape));
    return n.val[0];
  }
  std::size_t size() const { return nodes_.size(); }

  // ----- backward -----

  /// Reverse pass from a scalar loss. When into_params is true (the
  /// default), gradients accumulate into each bound Tensor's grad buffer.
  /// The recording is cleared afterwards either way.
  void backward(Val loss, bool into_params = true) {
    if (!loss.valid() || node(loss).val.size() != 1)
      throw NotScalarLossError("backward requires a scalar loss");
    for (auto& n : nodes_) n.grad.assign(n.val.size(), 0.0);
    nodes_[loss.id].grad[0] = 1.0;

    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
      Node& n = nodes_[id];
      bool any = false;
      for (double g : n.grad)
        if (g != 0.0) {
          any = true;
          break;
        }
      if (!any) continue;
      backprop_node(n);
    }
    if (into_params) {
      for (auto& [tensor, val] : param_vals_) {
        tensor->ensure_grad();
        const Node& leaf = nodes_[val.id];
        for (std::size_t i = 0; i < leaf.grad.size(); ++i) tensor->grad[i] += leaf.grad[i];
      }
    } else {
      local_grads_.clear();
      for (auto& [tensor, val] : param_vals_) local_grads_[tensor] = nodes_[val.id].grad;
    }
    clear_recording();
  }

  /// Per-parameter gradients captured by backward(loss, false).
  const std::map<Tensor*, std::vector<double>>& local_grads() const { return local_grads_; }

  void clear_recording() {
    nodes_.clear();
    param_vals_.clear();
  }

 private:
  enum class Op {
    Leaf,
    MatMul,
    Add,
    Mul,
    Concat,
    Relu,
    Sigmoid,
    Tanh,
    Log,
    Softmax,
    Sum,
    Inner,
    Scale,
    Row,
    LerpGate,
    BceLogits,
  };

  struct Node {
    Op op = Op::Leaf;
    std::vector<int> inputs;
    std::vector<int> shape;
    std::vector<double> val;
    std::vector<double> grad;
    Tensor* bound = nullptr;
    double aux = 0.0;
    int iaux = 0;
  };

  std::vector<Node> nodes_;
  std::map<Tensor*, Val> param_vals_;
  std::map<Tensor*, std::vector<double>> local_grads_;

  Val push(Node n) {
    nodes_.push_back(std::move(n));
    return Val{static_cast<int>(nodes_.size()) - 1};
  }
  const Node& node(Val v) const { return nodes_.at(static_cast<std::size_t>(v.id)); }

  template <typename F>
  Val unary(Val a, Op op, F f) {
    const Node& x = node(a);
    Node n;
    n.op = op;
    n.inputs = {a.id};
    n.shape = x.shape;
    n.val.resize(x.val.size());
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = f(x.val[i]);
    return push(std::move(n));
  }

  void backprop_node(Node& n) {
    auto& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        Node& w = nodes_[n.inputs[0]];
        Node& x = nodes_[n.inputs[1]];
        const int rows = w.shape[0], cols = w.shape[1];
        for (int i = 0; i < rows; ++i) {
          double gi = g[i];
          if (gi == 0.0) continue;
          double* wg = w.grad.data() + static_cast<std::size_t>(i) * cols;
          const double* wr = w.val.data() + static_cast<std::size_t>(i) * cols;
          for (int j = 0; j < cols; ++j) {
            wg[j] += gi * x.val[j];
            x.grad[j] += gi * wr[j];
          }
        }
        break;
      }
      case Op::Add: {
        for (int in : n.inputs) {
          Node& x = nodes_[in];
          for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i];
        }
        break;
      }
      case Op::Mul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        for (std::size_t i = 0; i < g.size(); ++i) {
          a.grad[i] += g[i] * b.val[i];
          b.grad[i] += g[i] * a.val[i];
        }
        break;
      }
      case Op::Concat: {
        std::size_t off = 0;
        for (int in : n.inputs) {
          Node& x = nodes_[in];
          for (std::size_t i = 0; i < x.val.size(); ++i) x.grad[i] += g[off + i];
          off += x.val.size();
        }
        break;
      }
      case Op::Relu: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < g.size(); ++i)
          if (x.val[i] > 0) x.grad[i] += g[i];
        break;
      }
      case Op::Sigmoid: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < g.size(); ++i)
          x.grad[i] += g[i] * n.val[i] * (1.0 - n.val[i]);
        break;
      }
      case Op::Tanh: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < g.size(); ++i)
          x.grad[i] += g[i] * (1.0 - n.val[i] * n.val[i]);
        break;
      }
      case Op::Log: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i] / x.val[i];
        break;
      }
      case Op::Softmax: {
        Node& x = nodes_[n.inputs[0]];
        double dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * n.val[i];
        for (std::size_t i = 0; i < g.size(); ++i)
          x.grad[i] += n.val[i] * (g[i] - dot);
        break;
      }
      case Op::Sum: {
        for (int in : n.inputs) {
          Node& x = nodes_[in];
          for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i];
        }
        break;
      }
      case Op::Inner: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        double g0 = g[0];
        for (std::size_t i = 0; i < a.val.size(); ++i) {
          a.grad[i] += g0 * b.val[i];
          b.grad[i] += g0 * a.val[i];
        }
        break;
      }
      case Op::Scale: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i] * n.aux;
        break;
      }
      case Op::Row: {
        Node& m = nodes_[n.inputs[0]];
        const int cols = m.shape[1];
        double* mg = m.grad.data() + static_cast<std::size_t>(n.iaux) * cols;
        for (int j = 0; j < cols; ++j) mg[j] += g[j];
        break;
      }
      case Op::LerpGate: {
        Node& z = nodes_[n.inputs[0]];
        Node& h = nodes_[n.inputs[1]];
        Node& t = nodes_[n.inputs[2]];
        for (std::size_t i = 0; i < g.size(); ++i) {
          z.grad[i] += g[i] * (t.val[i] - h.val[i]);
          h.grad[i] += g[i] * (1.0 - z.val[i]);
          t.grad[i] += g[i] * z.val[i];
        }
        break;
      }
      case Op::BceLogits: {
        Node& x = nodes_[n.inputs[0]];
        x.grad[0] += g[0] * (detail::sigmoid_stable(x.val[0]) - n.aux);
        break;
      }
    }
  }
};

}  // namespace ame::nn
