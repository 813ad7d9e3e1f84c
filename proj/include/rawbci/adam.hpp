#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/matrix.hpp"

namespace rawbci {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (learning_rate <= 0.0) {
      throw std::invalid_argument("adam: learning_rate must be > 0");
    }
    if (beta1 < 0.0 || beta1 >= 1.0) {
      throw std::invalid_argument("adam: beta1 must be in [0,1)");
    }
    if (beta2 < 0.0 || beta2 >= 1.0) {
      throw std::invalid_argument("adam: beta2 must be in [0,1)");
    }
    if (epsilon <= 0.0) {
      throw std::invalid_argument("adam: epsilon must be > 0");
    }
  }
};

/// Bias-corrected Adam state over a fixed list of parameter tensors. One
/// step counter t is shared by every tensor updated in a step. Epsilon is
/// added after the square root: theta -= lr * m_hat / (sqrt(v_hat) + eps).
class AdamState {
 public:
  explicit AdamState(const AdamConfig& config) : config_(config) {
    config_.validate();
  }

  const AdamConfig& config() const { return config_; }
  std::size_t step_count() const { return t_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

  /// One optimizer step over all parameters. Validates every gradient
  /// before mutating anything, so a bad input leaves parameters untouched.
  void step(const std::vector<Matrix*>& params,
            const std::vector<const Matrix*>& grads) {
    if (params.size() != grads.size()) {
      throw std::invalid_argument(
          "adam step: " + std::to_string(params.size()) + " params vs " +
          std::to_string(grads.size()) + " grads");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (!params[k]->same_shape(*grads[k])) {
        throw std::invalid_argument(
            "adam step: param " + std::to_string(k) + " shape " +
            params[k]->shape() + " vs grad " + grads[k]->shape());
      }
      if (!all_finite(*grads[k])) {
        throw std::invalid_argument("adam step: non-finite gradient in param " +
                                    std::to_string(k));
      }
    }
    if (m_.empty()) {
      for (const Matrix* p : params) {
        m_.emplace_back(p->rows(), p->cols(), 0.0);
        v_.emplace_back(p->rows(), p->cols(), 0.0);
      }
    } else if (m_.size() != params.size()) {
      throw std::invalid_argument(
          "adam step: parameter list size changed from " +
          std::to_string(m_.size()) + " to " + std::to_string(params.size()));
    }

    t_ += 1;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      std::vector<double>& theta = params[k]->data();
      const std::vector<double>& g = grads[k]->data();
      std::vector<double>& m = m_[k].data();
      std::vector<double>& v = v_[k].data();
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        theta[i] -= config_.learning_rate * m_hat /
                    (std::sqrt(v_hat) + config_.epsilon);
      }
    }
  }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace rawbci
