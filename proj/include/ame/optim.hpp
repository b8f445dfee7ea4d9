#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ame/tensor.hpp"

namespace ame::nn {

/// Named, insertion-ordered model parameters plus the optimizer's moment
/// buffers. Iteration order is the insertion order, which keeps training
/// trajectories reproducible.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw Error("duplicate parameter name: " + name);
    index_[name] = static_cast<int>(names_.size());
    names_.push_back(name);
    tensors_.push_back(Tensor::zeros(std::move(shape)));
    return tensors_.back();
  }

  Tensor& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("unknown parameter: " + name);
    return tensors_[it->second];
  }
  const Tensor& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("unknown parameter: " + name);
    return tensors_[it->second];
  }
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }

  std::size_t total_values() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.data.size();
    return n;
  }

  void zero_grads() {
    for (auto& t : tensors_) t.zero_grad();
  }

  long step_count() const { return step_; }

  /// Adaptive-moment update with bias correction; zeroes gradients after
  /// applying and advances the step counter.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (m_.size() != tensors_.size()) {
      m_.clear();
      v_.clear();
      for (const auto& t : tensors_) {
        m_.push_back(Tensor::zeros(t.shape));
        v_.push_back(Tensor::zeros(t.shape));
      }
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
    for (std::size_t p = 0; p < tensors_.size(); ++p) {
      Tensor& t = tensors_[p];
      if (t.grad.empty()) continue;
      for (std::size_t i = 0; i < t.data.size(); ++i) {
        double g = t.grad[i];
        m_[p].data[i] = beta1 * m_[p].data[i] + (1.0 - beta1) * g;
        v_[p].data[i] = beta2 * v_[p].data[i] + (1.0 - beta2) * g * g;
        double mhat = m_[p].data[i] / bc1;
        double vhat = v_[p].data[i] / bc2;
        t.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
      t.zero_grad();
    }
  }

  void reset_optimizer() {
    m_.clear();
    v_.clear();
    step_ = 0;
  }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<Tensor> tensors_;
  std::vector<Tensor> m_, v_;
  long step_ = 0;
};

/// Glorot-style uniform init over [-s, s] with s = sqrt(6 / (fan_in + fan_out)).
inline void glorot_init(Tensor& t, Rng& rng) {
  int fan_in = t.shape.size() == 2 ? t.shape[1] : t.numel();
  int fan_out = t.shape.size() == 2 ? t.shape[0] : t.numel();
  double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& x : t.data) x = rng.uniform(-s, s);
}

}  // namespace ame::nn
