#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/adam.hpp"
#include "rawbci/epochs.hpp"
#include "rawbci/json_util.hpp"
#include "rawbci/model.hpp"

namespace rawbci {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  AdamConfig adam;
  SplitRatios split;
  std::uint64_t seed = 3;
  ModelConfig model;

  void validate() const {
    if (epochs == 0) {
      throw std::invalid_argument("train config: epochs must be >= 1");
    }
    if (batch_size < 2) {
      throw std::invalid_argument(
          "train config: batch_size must be >= 2 (batch norm trains on "
          "batch statistics)");
    }
    adam.validate();
    split.validate();
  }
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<std::vector<int>> confusion;  // rows true, cols predicted
  std::vector<double> per_class_accuracy;
  std::size_t n_samples = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

using History = std::vector<EpochStats>;

/// Inference-mode confusion matrix and accuracy over a labeled set.
inline Metrics evaluate(MlpModel& model, const EpochSet& set) {
  if (set.size() == 0) {
    throw std::invalid_argument("evaluate: empty epoch set");
  }
  const std::size_t n_classes = model.config().n_classes;
  set.validate(n_classes);
  const std::vector<int> predicted = model.predict(set.features);
  Metrics m;
  m.n_samples = set.size();
  m.confusion.assign(n_classes, std::vector<int>(n_classes, 0));
  for (std::size_t i = 0; i < set.size(); ++i) {
    m.confusion[static_cast<std::size_t>(set.labels[i])]
               [static_cast<std::size_t>(predicted[i])] += 1;
  }
  int correct = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    correct += m.confusion[c][c];
    int row_total = 0;
    for (std::size_t j = 0; j < n_classes; ++j) row_total += m.confusion[c][j];
    m.per_class_accuracy.push_back(
        row_total == 0 ? 0.0
                       : static_cast<double>(m.confusion[c][c]) /
                             static_cast<double>(row_total));
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n_samples);
  return m;
}

namespace detail {

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// One inference pass giving both mean loss and accuracy.
inline LossAccuracy inference_loss_accuracy(MlpModel& model,
                                            const EpochSet& set) {
  const auto [loss, probs] = model.forward(set.features, set.labels, false);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.cols(); ++j) {
      if (probs(i, j) > probs(i, best)) best = j;
    }
    if (static_cast<int>(best) == set.labels[i]) ++correct;
  }
  return {loss, static_cast<double>(correct) /
                    static_cast<double>(set.size())};
}

}  // namespace detail

/// Mini-batch training: per epoch, shuffle rows with the epoch-derived seed
/// (derive_seed(config.seed, epoch)), run full batches plus one final short
/// batch if it still holds >= 2 rows (a size-1 remainder is dropped), then
/// record train/validation loss and accuracy measured in inference mode.
inline History train(MlpModel& model, const EpochSet& train_set,
                     const EpochSet& val_set, const TrainConfig& config) {
  config.validate();
  if (train_set.size() == 0) {
    throw std::invalid_argument("train: empty training set");
  }
  if (train_set.feature_dim() != model.config().input_dim) {
    throw std::invalid_argument(
        "train: features have " + std::to_string(train_set.feature_dim()) +
        " dims, model expects " + std::to_string(model.config().input_dim));
  }
  const std::size_t n_classes = model.config().n_classes;
  train_set.validate(n_classes);
  val_set.validate(n_classes);

  AdamState optimizer(config.adam);
  const std::vector<Matrix*> params = model.parameters();
  const std::vector<const Matrix*> grads = model.gradients();

  History history;
  history.reserve(config.epochs);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng rng(derive_seed(config.seed, epoch));
    rng.shuffle(order);

    for (std::size_t at = 0; at < order.size(); at += config.batch_size) {
      const std::size_t take =
          std::min(config.batch_size, order.size() - at);
      if (take < 2) break;  // drop a size-1 remainder
      Matrix batch(take, train_set.feature_dim());
      std::vector<int> labels(take);
      for (std::size_t r = 0; r < take; ++r) {
        const std::size_t src = order[at + r];
        for (std::size_t j = 0; j < train_set.feature_dim(); ++j) {
          batch(r, j) = train_set.features(src, j);
        }
        labels[r] = train_set.labels[src];
      }
      model.forward(batch, labels, true);
      model.backward(labels);
      optimizer.step(params, grads);
    }

    EpochStats stats;
    const auto train_eval = detail::inference_loss_accuracy(model, train_set);
    stats.train_loss = train_eval.loss;
    stats.train_accuracy = train_eval.accuracy;
    if (val_set.size() > 0) {
      const auto val_eval = detail::inference_loss_accuracy(model, val_set);
      stats.val_loss = val_eval.loss;
      stats.val_accuracy = val_eval.accuracy;
    }
    history.push_back(stats);
  }
  return history;
}

inline json metrics_to_json(const Metrics& m) {
  return json{{"accuracy", m.accuracy},
              {"confusion", m.confusion},
              {"per_class_accuracy", m.per_class_accuracy},
              {"n_samples", m.n_samples}};
}

inline json train_config_to_json(const TrainConfig& c) {
  return json{
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"learning_rate", c.adam.learning_rate},
      {"beta1", c.adam.beta1},
      {"beta2", c.adam.beta2},
      {"adam_epsilon", c.adam.epsilon},
      {"split", {c.split.train, c.split.val, c.split.test}},
      {"seed", c.seed},
      {"model",
       {{"input_dim", c.model.input_dim},
        {"hidden_dims", {c.model.hidden_dims[0], c.model.hidden_dims[1]}},
        {"n_classes", c.model.n_classes},
        {"leaky_slope", c.model.leaky_slope},
        {"bn_epsilon", c.model.bn_epsilon},
        {"bn_momentum", c.model.bn_momentum},
        {"init_scale", c.model.init_scale},
        {"seed", c.model.seed}}}};
}

/// Writes <prefix>_history.csv (epoch, train_loss, train_acc, val_loss,
/// val_acc; epochs 1-based) and <prefix>_metrics.json (final metrics,
/// config echo, seed). No timestamps anywhere, so identical runs rewrite
/// identical bytes.
inline void export_history(const History& history, const Metrics& metrics,
                           const TrainConfig& config,
                           const std::string& path_prefix) {
  const std::string csv_path = path_prefix + "_history.csv";
  std::ofstream csv(csv_path);
  if (!csv) {
    throw std::runtime_error("export_history: cannot open " + csv_path);
  }
  csv << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char buf[40];
  for (std::size_t e = 0; e < history.size(); ++e) {
    csv << (e + 1);
    for (double v : {history[e].train_loss, history[e].train_accuracy,
                     history[e].val_loss, history[e].val_accuracy}) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      csv << ',' << buf;
    }
    csv << '\n';
  }
  if (!csv) {
    throw std::runtime_error("export_history: write failed: " + csv_path);
  }

  json doc = metrics_to_json(metrics);
  doc["feature_dim"] = config.model.input_dim;
  doc["config"] = train_config_to_json(config);
  doc["seed"] = config.seed;
  const std::string json_path = path_prefix + "_metrics.json";
  std::ofstream out(json_path);
  if (!out) {
    throw std::runtime_error("export_history: cannot open " + json_path);
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("export_history: write failed: " + json_path);
  }
}

}  // namespace rawbci
