#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rawbci/adam.hpp"
#include "rawbci/layers.hpp"
#include "rawbci/matrix.hpp"
#include "rawbci/rng.hpp"

namespace rawbci {

/// Architecture and initialization settings for the classifier: an input
/// layer, two hidden blocks of dense + batch norm + leaky ReLU, and a dense
/// output layer feeding softmax cross-entropy.
struct ModelConfig {
  std::size_t input_dim = 0;
  std::array<std::size_t, 2> hidden_dims = {128, 64};
  std::size_t n_classes = 5;
  double leaky_slope = 0.01;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;
  double init_scale = 0.01;
  std::uint64_t seed = 2;

  void validate() const {
    if (input_dim == 0) {
      throw std::invalid_argument("model config: input_dim must be positive");
    }
    if (hidden_dims[0] == 0 || hidden_dims[1] == 0) {
      throw std::invalid_argument(
          "model config: hidden_dims must be positive");
    }
    if (n_classes < 2) {
      throw std::invalid_argument("model config: n_classes must be >= 2");
    }
    if (leaky_slope <= 0.0 || leaky_slope >= 1.0) {
      throw std::invalid_argument(
          "model config: leaky_slope must be in (0,1)");
    }
    if (bn_epsilon <= 0.0) {
      throw std::invalid_argument("model config: bn_epsilon must be > 0");
    }
    if (bn_momentum < 0.0 || bn_momentum > 1.0) {
      throw std::invalid_argument(
          "model config: bn_momentum must be in [0,1]");
    }
    if (init_scale < 0.0) {
      throw std::invalid_argument("model config: init_scale must be >= 0");
    }
  }

  /// Closed-form number of trainable scalars: per dense layer W and b, per
  /// batch norm gamma and beta.
  std::size_t parameter_count() const {
    const std::size_t h1 = hidden_dims[0], h2 = hidden_dims[1];
    return (input_dim * h1 + h1) + 2 * h1 + (h1 * h2 + h2) + 2 * h2 +
           (h2 * n_classes + n_classes);
  }
};

/// The four-layer MLP: Dense -> BatchNorm -> LeakyReLU -> Dense ->
/// BatchNorm -> LeakyReLU -> Dense, with softmax cross-entropy fused in as
/// the terminal loss.
class MlpModel {
 public:
  explicit MlpModel(const ModelConfig& config)
      : config_(config),
        dense1_(config.input_dim, config.hidden_dims[0]),
        bn1_(config.hidden_dims[0], config.bn_epsilon, config.bn_momentum),
        act1_(config.leaky_slope),
        dense2_(config.hidden_dims[0], config.hidden_dims[1]),
        bn2_(config.hidden_dims[1], config.bn_epsilon, config.bn_momentum),
        act2_(config.leaky_slope),
        dense3_(config.hidden_dims[1], config.n_classes),
        loss_(config.n_classes) {
    config.validate();
  }

  const ModelConfig& config() const { return config_; }

  /// Logits for a batch; batch norm mode follows the training flag.
  Matrix logits(const Matrix& x, bool training) {
    if (x.cols() != config_.input_dim) {
      throw std::invalid_argument(
          "model: input has " + std::to_string(x.cols()) +
          " features, model expects " + std::to_string(config_.input_dim));
    }
    Matrix h = dense1_.forward(x, training);
    h = bn1_.forward(h, training);
    h = act1_.forward(h, training);
    h = dense2_.forward(h, training);
    h = bn2_.forward(h, training);
    h = act2_.forward(h, training);
    return dense3_.forward(h, training);
  }

  /// Full stack in order; returns (mean cross-entropy loss, probabilities).
  std::pair<double, Matrix> forward(const Matrix& x,
                                    const std::vector<int>& labels,
                                    bool training) {
    const Matrix z = logits(x, training);
    const double loss_value = loss_.forward(z, labels, training);
    return {loss_value, loss_.probabilities(z)};
  }

  /// Reverse traversal populating every layer's parameter gradients.
  /// Requires a preceding training-mode forward.
  void backward(const std::vector<int>& labels) {
    Matrix d = loss_.backward(labels);
    d = dense3_.backward(d);
    d = act2_.backward(d);
    d = bn2_.backward(d);
    d = dense2_.backward(d);
    d = act1_.backward(d);
    d = bn1_.backward(d);
    last_input_grad_ = dense1_.backward(d);
  }

  /// Gradient of the loss with respect to the input batch, from the most
  /// recent backward.
  const Matrix& input_gradient() const { return last_input_grad_; }

  /// Inference-mode argmax of the class probabilities, ties to the lowest
  /// class index.
  std::vector<int> predict(const Matrix& x) {
    const Matrix probs = loss_.probabilities(logits(x, false));
    std::vector<int> out(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < probs.cols(); ++j) {
        if (probs(i, j) > probs(i, best)) best = j;
      }
      out[i] = static_cast<int>(best);
    }
    return out;
  }

  /// Trainable tensors in a fixed order shared with gradients() and the
  /// checkpoint format.
  std::vector<Matrix*> parameters() {
    return {&dense1_.W, &dense1_.b, &bn1_.gamma, &bn1_.beta,
            &dense2_.W, &dense2_.b, &bn2_.gamma, &bn2_.beta,
            &dense3_.W, &dense3_.b};
  }

  std::vector<const Matrix*> gradients() const {
    return {&dense1_.grad_W, &dense1_.grad_b, &bn1_.grad_gamma,
            &bn1_.grad_beta, &dense2_.grad_W, &dense2_.grad_b,
            &bn2_.grad_gamma, &bn2_.grad_beta, &dense3_.grad_W,
            &dense3_.grad_b};
  }

  static std::vector<std::string> parameter_names() {
    return {"dense1.W", "dense1.b", "bn1.gamma", "bn1.beta",
            "dense2.W", "dense2.b", "bn2.gamma", "bn2.beta",
            "dense3.W", "dense3.b"};
  }

  /// Running statistics, ordered to pair with state_names().
  std::vector<Matrix*> running_stats() {
    return {&bn1_.running_mean, &bn1_.running_var, &bn2_.running_mean,
            &bn2_.running_var};
  }

  static std::vector<std::string> state_names() {
    return {"bn1.running_mean", "bn1.running_var", "bn2.running_mean",
            "bn2.running_var"};
  }

 private:
  ModelConfig config_;
  DenseLayer dense1_;
  BatchNormLayer bn1_;
  LeakyReluLayer act1_;
  DenseLayer dense2_;
  BatchNormLayer bn2_;
  LeakyReluLayer act2_;
  DenseLayer dense3_;
  SoftmaxCrossEntropy loss_;
  Matrix last_input_grad_;
};

/// Fresh model from a config: weights are randn * init_scale drawn from the
/// config seed in layer order (dense1, dense2, dense3), biases zero, gamma
/// one, beta zero, running mean zero, running variance one.
inline MlpModel build_model(const ModelConfig& config) {
  config.validate();
  MlpModel model(config);
  SeededRng rng(config.seed);
  std::vector<Matrix*> params = model.parameters();
  // parameters() order: W1 b1 g1 be1 W2 b2 g2 be2 W3 b3; draw weights only.
  for (std::size_t k : {0u, 4u, 8u}) {
    Matrix* w = params[k];
    *w = randn(rng, w->rows(), w->cols(), config.init_scale);
  }
  return model;
}

}  // namespace rawbci
