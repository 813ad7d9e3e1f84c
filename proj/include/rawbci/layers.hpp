#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/matrix.hpp"

namespace rawbci {

// Layer call protocol, shared by every layer below:
//  - forward(x, training): caches what backward needs only when training.
//  - backward(d_out): consumes the cache and invalidates it, so a second
//    backward without a fresh training forward throws std::logic_error.
//  - inference forward never mutates layer state.

/// Fully connected layer: y = x W + b, W is in_dim x out_dim.
class DenseLayer {
 public:
  DenseLayer(std::size_t in_dim, std::size_t out_dim)
      : W(in_dim, out_dim),
        b(1, out_dim),
        grad_W(in_dim, out_dim),
        grad_b(1, out_dim) {}

  std::size_t in_dim() const { return W.rows(); }
  std::size_t out_dim() const { return W.cols(); }

  Matrix forward(const Matrix& x, bool training) {
    if (x.cols() != W.rows()) {
      throw std::invalid_argument("dense forward: input " + x.shape() +
                                  " does not match weights " + W.shape());
    }
    if (training) {
      cached_input_ = x;
      has_cache_ = true;
    }
    return add_row_broadcast(matmul(x, W), b);
  }

  /// Sets grad_W = x^T d_out and grad_b = column sums of d_out; returns
  /// d_x = d_out W^T.
  Matrix backward(const Matrix& d_out) {
    if (!has_cache_) {
      throw std::logic_error("dense backward: no cached forward input");
    }
    if (d_out.rows() != cached_input_.rows() || d_out.cols() != W.cols()) {
      throw std::invalid_argument("dense backward: upstream gradient " +
                                  d_out.shape() + " does not match batch " +
                                  cached_input_.shape() + " and weights " +
                                  W.shape());
    }
    grad_W = matmul(transpose(cached_input_), d_out);
    grad_b = col_sum(d_out);
    has_cache_ = false;
    return matmul(d_out, transpose(W));
  }

  Matrix W;
  Matrix b;
  Matrix grad_W;
  Matrix grad_b;

 private:
  Matrix cached_input_;
  bool has_cache_ = false;
};

/// Per-feature batch normalization with learned scale/shift and running
/// statistics for inference. Batch statistics use the population (1/N)
/// variance, and the running variance is stored with the same convention.
class BatchNormLayer {
 public:
  BatchNormLayer(std::size_t dim, double epsilon = 1e-5,
                 double momentum = 0.1)
      : gamma(1, dim, 1.0),
        beta(1, dim, 0.0),
        running_mean(1, dim, 0.0),
        running_var(1, dim, 1.0),
        grad_gamma(1, dim),
        grad_beta(1, dim),
        epsilon_(epsilon),
        momentum_(momentum) {
    if (epsilon <= 0.0) {
      throw std::invalid_argument("batch norm: epsilon must be > 0");
    }
    if (momentum < 0.0 || momentum > 1.0) {
      throw std::invalid_argument("batch norm: momentum must be in [0,1]");
    }
  }

  std::size_t dim() const { return gamma.cols(); }
  double epsilon() const { return epsilon_; }
  double momentum() const { return momentum_; }

  /// Training: normalize by batch column mean / population variance, then
  /// update running stats as running <- (1-momentum)*running + momentum*batch.
  /// Inference: normalize by running stats, no state mutation.
  Matrix forward(const Matrix& x, bool training) {
    if (x.cols() != dim()) {
      throw std::invalid_argument("batch norm forward: input " + x.shape() +
                                  " does not match dim " +
                                  std::to_string(dim()));
    }
    if (training) {
      if (x.rows() < 2) {
        throw std::invalid_argument(
            "batch norm forward: training batch must have >= 2 rows, got " +
            std::to_string(x.rows()));
      }
      batch_mean_ = col_mean(x);
      batch_var_ = col_var(x);
      inv_std_ = Matrix(1, dim());
      for (std::size_t j = 0; j < dim(); ++j) {
        inv_std_(0, j) = 1.0 / std::sqrt(batch_var_(0, j) + epsilon_);
      }
      centered_ = x;
      x_hat_ = Matrix(x.rows(), x.cols());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
          centered_(i, j) -= batch_mean_(0, j);
          x_hat_(i, j) = centered_(i, j) * inv_std_(0, j);
        }
      }
      for (std::size_t j = 0; j < dim(); ++j) {
        running_mean(0, j) = (1.0 - momentum_) * running_mean(0, j) +
                             momentum_ * batch_mean_(0, j);
        running_var(0, j) = (1.0 - momentum_) * running_var(0, j) +
                            momentum_ * batch_var_(0, j);
      }
      has_cache_ = true;
      return affine(x_hat_);
    }
    Matrix x_hat(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        x_hat(i, j) = (x(i, j) - running_mean(0, j)) /
                      std::sqrt(running_var(0, j) + epsilon_);
      }
    }
    return affine(x_hat);
  }

  /// Chain rule through the batch mean and variance. Requires a preceding
  /// training-mode forward.
  Matrix backward(const Matrix& d_out) {
    if (!has_cache_) {
      throw std::logic_error(
          "batch norm backward: no cached training-mode forward");
    }
    if (d_out.rows() != x_hat_.rows() || d_out.cols() != dim()) {
      throw std::invalid_argument("batch norm backward: upstream gradient " +
                                  d_out.shape() + " does not match batch " +
                                  x_hat_.shape());
    }
    const std::size_t n = d_out.rows();
    const std::size_t d = dim();
    const double inv_n = 1.0 / static_cast<double>(n);

    grad_gamma = col_sum(hadamard(d_out, x_hat_));
    grad_beta = col_sum(d_out);

    // d_xhat = d_out * gamma (per column)
    Matrix d_xhat = d_out;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        d_xhat(i, j) *= gamma(0, j);
      }
    }
    // d_var(j) = sum_i d_xhat(i,j) * centered(i,j) * (-1/2) inv_std^3
    Matrix d_var(1, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        d_var(0, j) += d_xhat(i, j) * centered_(i, j);
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double s = inv_std_(0, j);
      d_var(0, j) *= -0.5 * s * s * s;
    }
    // d_mean(j) = -inv_std * sum_i d_xhat(i,j) + d_var * (-2/N) sum_i centered
    Matrix d_mean(1, d, 0.0);
    Matrix centered_sum(1, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        d_mean(0, j) += d_xhat(i, j);
        centered_sum(0, j) += centered_(i, j);
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      d_mean(0, j) = -inv_std_(0, j) * d_mean(0, j) +
                     d_var(0, j) * (-2.0 * inv_n) * centered_sum(0, j);
    }
    Matrix d_x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        d_x(i, j) = d_xhat(i, j) * inv_std_(0, j) +
                    d_var(0, j) * 2.0 * centered_(i, j) * inv_n +
                    d_mean(0, j) * inv_n;
      }
    }
    has_cache_ = false;
    return d_x;
  }

  Matrix gamma;
  Matrix beta;
  Matrix running_mean;
  Matrix running_var;
  Matrix grad_gamma;
  Matrix grad_beta;

 private:
  Matrix affine(const Matrix& x_hat) const {
    Matrix out = x_hat;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      for (std::size_t j = 0; j < out.cols(); ++j) {
        out(i, j) = out(i, j) * gamma(0, j) + beta(0, j);
      }
    }
    return out;
  }

  double epsilon_;
  double momentum_;
  Matrix batch_mean_;
  Matrix batch_var_;
  Matrix inv_std_;
  Matrix centered_;
  Matrix x_hat_;
  bool has_cache_ = false;
};

/// y = x for x >= 0, slope * x for x < 0.
class LeakyReluLayer {
 public:
  explicit LeakyReluLayer(double slope = 0.01) : slope_(slope) {
    if (slope <= 0.0 || slope >= 1.0) {
      throw std::invalid_argument("leaky relu: slope must be in (0,1), got " +
                                  std::to_string(slope));
    }
  }

  double slope() const { return slope_; }

  Matrix forward(const Matrix& x, bool training) {
    if (training) {
      cached_input_ = x;
      has_cache_ = true;
    }
    Matrix out = x;
    for (double& v : out.data()) {
      if (v < 0.0) v *= slope_;
    }
    return out;
  }

  Matrix backward(const Matrix& d_out) {
    if (!has_cache_) {
      throw std::logic_error("leaky relu backward: no cached forward input");
    }
    check_same_shape(d_out, cached_input_, "leaky relu backward");
    Matrix d_x = d_out;
    for (std::size_t i = 0; i < d_x.size(); ++i) {
      if (cached_input_.data()[i] < 0.0) d_x.data()[i] *= slope_;
    }
    has_cache_ = false;
    return d_x;
  }

 private:
  double slope_;
  Matrix cached_input_;
  bool has_cache_ = false;
};

/// Row-wise softmax fused with mean cross-entropy loss. The row maximum is
/// subtracted before exponentiation, and the loss is computed through
/// log-sum-exp, so saturated logits neither overflow nor hit log(0).
class SoftmaxCrossEntropy {
 public:
  explicit SoftmaxCrossEntropy(std::size_t n_classes)
      : n_classes_(n_classes) {
    if (n_classes < 2) {
      throw std::invalid_argument("softmax: need at least 2 classes");
    }
  }

  std::size_t n_classes() const { return n_classes_; }

  /// Stable row-wise softmax probabilities, no state change.
  Matrix probabilities(const Matrix& logits) const {
    if (logits.cols() != n_classes_) {
      throw std::invalid_argument("softmax: logits " + logits.shape() +
                                  " do not match " +
                                  std::to_string(n_classes_) + " classes");
    }
    Matrix probs(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      double row_max = logits(i, 0);
      for (std::size_t j = 1; j < n_classes_; ++j) {
        row_max = std::max(row_max, logits(i, j));
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < n_classes_; ++j) {
        probs(i, j) = std::exp(logits(i, j) - row_max);
        denom += probs(i, j);
      }
      for (std::size_t j = 0; j < n_classes_; ++j) probs(i, j) /= denom;
    }
    return probs;
  }

  /// Mean over the batch of -log p(true class). Caches probabilities for
  /// backward when training.
  double forward(const Matrix& logits, const std::vector<int>& labels,
                 bool training) {
    if (labels.size() != logits.rows()) {
      throw std::invalid_argument(
          "softmax forward: " + std::to_string(labels.size()) +
          " labels for " + std::to_string(logits.rows()) + " logit rows");
    }
    check_labels(labels);
    double loss = 0.0;
    Matrix probs(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      double row_max = logits(i, 0);
      for (std::size_t j = 1; j < n_classes_; ++j) {
        row_max = std::max(row_max, logits(i, j));
      }
      double sum_exp = 0.0;
      for (std::size_t j = 0; j < n_classes_; ++j) {
        probs(i, j) = std::exp(logits(i, j) - row_max);
        sum_exp += probs(i, j);
      }
      for (std::size_t j = 0; j < n_classes_; ++j) probs(i, j) /= sum_exp;
      const double log_sum_exp = row_max + std::log(sum_exp);
      loss += log_sum_exp - logits(i, static_cast<std::size_t>(labels[i]));
    }
    loss /= static_cast<double>(logits.rows());
    if (training) {
      cached_probs_ = std::move(probs);
      has_cache_ = true;
    }
    return loss;
  }

  const Matrix& cached_probabilities() const { return cached_probs_; }

  /// Returns (probabilities - one_hot(labels)) / batch_size.
  Matrix backward(const std::vector<int>& labels) {
    if (!has_cache_) {
      throw std::logic_error("softmax backward: no cached forward");
    }
    if (labels.size() != cached_probs_.rows()) {
      throw std::invalid_argument(
          "softmax backward: " + std::to_string(labels.size()) +
          " labels for " + std::to_string(cached_probs_.rows()) +
          " cached rows");
    }
    check_labels(labels);
    const double inv_batch = 1.0 / static_cast<double>(cached_probs_.rows());
    Matrix d_logits = cached_probs_;
    for (std::size_t i = 0; i < d_logits.rows(); ++i) {
      d_logits(i, static_cast<std::size_t>(labels[i])) -= 1.0;
      for (std::size_t j = 0; j < n_classes_; ++j) {
        d_logits(i, j) *= inv_batch;
      }
    }
    has_cache_ = false;
    return d_logits;
  }

 private:
  void check_labels(const std::vector<int>& labels) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes_) {
        throw std::invalid_argument(
            "softmax: label " + std::to_string(labels[i]) + " at row " +
            std::to_string(i) + " outside [0, " +
            std::to_string(n_classes_) + ")");
      }
    }
  }

  std::size_t n_classes_;
  Matrix cached_probs_;
  bool has_cache_ = false;
};

}  // namespace rawbci
