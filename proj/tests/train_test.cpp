#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "rawbci/epochs.hpp"
#include "rawbci/model.hpp"
#include "rawbci/rng.hpp"
#include "rawbci/synthgen.hpp"
#include "rawbci/train.hpp"

using rawbci::build_model;
using rawbci::EpochSet;
using rawbci::Matrix;
using rawbci::Metrics;
using rawbci::MlpModel;
using rawbci::Modality;
using rawbci::SeededRng;
using rawbci::TrainConfig;

namespace {

// 40-sample, 4-feature, 2-class set with well-separated means.
EpochSet separable_toy_set() {
  SeededRng rng(64);
  EpochSet set;
  set.features = Matrix(40, 4);
  for (std::size_t i = 0; i < 40; ++i) {
    const int label = i < 20 ? 0 : 1;
    const double center = label == 0 ? 2.0 : -2.0;
    for (std::size_t j = 0; j < 4; ++j) {
      set.features(i, j) = center + 0.3 * rng.normal();
    }
    set.labels.push_back(label);
    set.provenance.push_back(
        rawbci::EpochProvenance{"toy", static_cast<int>(i), {Modality::FNIRS}});
  }
  return set;
}

EpochSet balanced_five_class_set(std::size_t per_class) {
  SeededRng rng(65);
  EpochSet set;
  set.features = Matrix(5 * per_class, 3);
  for (double& v : set.features.data()) v = rng.normal();
  for (std::size_t c = 0; c < 5; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      set.labels.push_back(static_cast<int>(c));
      set.provenance.push_back(rawbci::EpochProvenance{
          "m", static_cast<int>(c * per_class + i), {Modality::FNIRS}});
    }
  }
  return set;
}

TrainConfig toy_train_config(const EpochSet& data, std::size_t epochs) {
  TrainConfig config;
  config.epochs = epochs;
  config.batch_size = 8;
  config.seed = 12;
  config.model.input_dim = data.feature_dim();
  config.model.hidden_dims = {16, 8};
  config.model.n_classes = 2;
  config.model.seed = 21;
  return config;
}

std::vector<double> flatten_state(MlpModel& model) {
  std::vector<double> out;
  for (Matrix* p : model.parameters()) {
    out.insert(out.end(), p->data().begin(), p->data().end());
  }
  for (Matrix* s : model.running_stats()) {
    out.insert(out.end(), s->data().begin(), s->data().end());
  }
  return out;
}

}  // namespace

TEST(Train, OverfitsASeparableToySet) {
  const EpochSet toy = separable_toy_set();
  const TrainConfig config = toy_train_config(toy, 50);
  MlpModel model = build_model(config.model);
  const rawbci::History history = train(model, toy, toy, config);
  ASSERT_EQ(history.size(), config.epochs);
  EXPECT_DOUBLE_EQ(history.back().train_accuracy, 1.0);
  // trained to 100%: predictions equal the training labels
  EXPECT_EQ(model.predict(toy.features), toy.labels);
}

TEST(Train, ConfigGuards) {
  const EpochSet toy = separable_toy_set();
  TrainConfig config = toy_train_config(toy, 0);
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = toy_train_config(toy, 5);
  config.batch_size = 1;
  EXPECT_THROW(config.validate(), std::invalid_argument);

  config = toy_train_config(toy, 5);
  MlpModel model = build_model(config.model);
  EXPECT_THROW(train(model, EpochSet{}, toy, config), std::invalid_argument);
}

TEST(Train, ShortFinalBatchKeptWhenAtLeastTwoRows) {
  // 17 rows, batch 16: the final 1-row remainder must be dropped, so the
  // epoch runs without tripping the batch-norm minimum
  SeededRng rng(66);
  EpochSet set;
  set.features = Matrix(17, 3);
  for (double& v : set.features.data()) v = rng.normal();
  for (std::size_t i = 0; i < 17; ++i) {
    set.labels.push_back(static_cast<int>(i % 2));
    set.provenance.push_back(
        rawbci::EpochProvenance{"r", static_cast<int>(i), {Modality::FNIRS}});
  }
  TrainConfig config;
  config.epochs = 2;
  config.batch_size = 16;
  config.model.input_dim = 3;
  config.model.hidden_dims = {4, 4};
  config.model.n_classes = 2;
  MlpModel model = build_model(config.model);
  EXPECT_NO_THROW(train(model, set, set, config));
}

TEST(Train, BitwiseDeterministicGivenSeedAndData) {
  const EpochSet toy = separable_toy_set();
  const TrainConfig config = toy_train_config(toy, 12);

  MlpModel model_a = build_model(config.model);
  const rawbci::History history_a = train(model_a, toy, toy, config);
  MlpModel model_b = build_model(config.model);
  const rawbci::History history_b = train(model_b, toy, toy, config);

  ASSERT_EQ(history_a.size(), history_b.size());
  for (std::size_t e = 0; e < history_a.size(); ++e) {
    EXPECT_EQ(history_a[e].train_loss, history_b[e].train_loss);
    EXPECT_EQ(history_a[e].train_accuracy, history_b[e].train_accuracy);
    EXPECT_EQ(history_a[e].val_loss, history_b[e].val_loss);
    EXPECT_EQ(history_a[e].val_accuracy, history_b[e].val_accuracy);
  }
  EXPECT_EQ(flatten_state(model_a), flatten_state(model_b));
}

TEST(Train, LossDecreasesOnSyntheticData) {
  rawbci::SynthConfig synth;
  synth.n_subjects = 3;
  synth.seed = 9;
  synth.modalities[0].n_channels = 20;
  std::vector<EpochSet> subjects;
  for (std::size_t s = 0; s < synth.n_subjects; ++s) {
    subjects.push_back(
        rawbci::make_epochset(rawbci::generate_session(synth, s).front()));
  }
  const EpochSet all = rawbci::concat_epochsets(subjects);

  TrainConfig config;
  config.epochs = 20;
  config.batch_size = 16;
  config.seed = 4;
  config.model.input_dim = all.feature_dim();
  config.model.hidden_dims = {32, 16};
  config.model.n_classes = 5;

  const rawbci::Split split =
      rawbci::split_stratified(all, config.split, config.seed);
  MlpModel model = build_model(config.model);
  const rawbci::History history = train(model, split.train, split.val, config);

  double first = 0.0, last = 0.0;
  for (int e = 0; e < 10; ++e) {
    first += history[e].train_loss;
    last += history[history.size() - 10 + e].train_loss;
  }
  EXPECT_LT(last, first);
}

TEST(Evaluate, PerfectPredictorGivesDiagonalConfusion) {
  const EpochSet toy = separable_toy_set();
  TrainConfig config = toy_train_config(toy, 50);
  MlpModel model = build_model(config.model);
  train(model, toy, toy, config);
  const Metrics metrics = rawbci::evaluate(model, toy);
  EXPECT_DOUBLE_EQ(metrics.accuracy, 1.0);
  EXPECT_EQ(metrics.n_samples, 40u);
  EXPECT_EQ(metrics.confusion[0][0], 20);
  EXPECT_EQ(metrics.confusion[1][1], 20);
  EXPECT_EQ(metrics.confusion[0][1], 0);
  EXPECT_EQ(metrics.confusion[1][0], 0);
  EXPECT_DOUBLE_EQ(metrics.per_class_accuracy[0], 1.0);
  EXPECT_DOUBLE_EQ(metrics.per_class_accuracy[1], 1.0);
}

TEST(Evaluate, ConstantPredictorOnBalancedClasses) {
  const EpochSet balanced = balanced_five_class_set(5);
  rawbci::ModelConfig config;
  config.input_dim = 3;
  config.hidden_dims = {4, 4};
  config.n_classes = 5;
  config.init_scale = 0.0;  // uniform softmax, ties to class 0
  MlpModel model = build_model(config);
  const Metrics metrics = rawbci::evaluate(model, balanced);
  EXPECT_DOUBLE_EQ(metrics.accuracy, 0.2);
  for (std::size_t c = 0; c < 5; ++c) {
    EXPECT_EQ(metrics.confusion[c][0], 5);
    for (std::size_t j = 1; j < 5; ++j) {
      EXPECT_EQ(metrics.confusion[c][j], 0);
    }
  }
}

TEST(Evaluate, HandEnumeratedSixSampleCase) {
  // constant class-0 predictor on labels {0,0,0,0,1,2}: 4 right, 2 wrong
  rawbci::ModelConfig config;
  config.input_dim = 2;
  config.hidden_dims = {3, 3};
  config.n_classes = 3;
  config.init_scale = 0.0;
  MlpModel model = build_model(config);
  EpochSet set;
  set.features = Matrix(6, 2, 0.5);
  set.labels = {0, 0, 0, 0, 1, 2};
  set.provenance.resize(6);
  const Metrics metrics = rawbci::evaluate(model, set);
  EXPECT_DOUBLE_EQ(metrics.accuracy, 4.0 / 6.0);
  EXPECT_EQ(metrics.confusion[0][0], 4);
  EXPECT_EQ(metrics.confusion[1][0], 1);
  EXPECT_EQ(metrics.confusion[2][0], 1);
  EXPECT_EQ(metrics.n_samples, 6u);
}

TEST(Evaluate, MetricsInternalConsistency) {
  const EpochSet balanced = balanced_five_class_set(7);
  rawbci::ModelConfig config;
  config.input_dim = 3;
  config.hidden_dims = {8, 6};
  config.n_classes = 5;
  config.init_scale = 0.4;
  config.seed = 77;
  MlpModel model = build_model(config);
  const Metrics metrics = rawbci::evaluate(model, balanced);

  int trace = 0, total = 0;
  for (std::size_t c = 0; c < 5; ++c) {
    int row = 0;
    for (std::size_t j = 0; j < 5; ++j) {
      trace += (c == j) ? metrics.confusion[c][j] : 0;
      row += metrics.confusion[c][j];
      total += metrics.confusion[c][j];
    }
    EXPECT_EQ(row, 7);  // row sums equal the true class counts
  }
  EXPECT_EQ(total, static_cast<int>(metrics.n_samples));
  EXPECT_DOUBLE_EQ(metrics.accuracy,
                   static_cast<double>(trace) /
                       static_cast<double>(metrics.n_samples));
}

TEST(Evaluate, EmptySetRejectedAndModelUntouched) {
  rawbci::ModelConfig config;
  config.input_dim = 3;
  config.hidden_dims = {4, 4};
  config.n_classes = 5;
  MlpModel model = build_model(config);
  EXPECT_THROW(rawbci::evaluate(model, EpochSet{}), std::invalid_argument);

  const EpochSet balanced = balanced_five_class_set(4);
  const std::vector<double> before = flatten_state(model);
  rawbci::evaluate(model, balanced);
  EXPECT_EQ(before, flatten_state(model));
}

TEST(ExportHistory, CsvRowsAndMetricsJsonRoundTrip) {
  rawbci::History history(3);
  history[0] = {1.5, 0.3, 1.6, 0.25};
  history[1] = {1.1, 0.5, 1.2, 0.5};
  history[2] = {0.7, 0.9, 0.8, 0.75};

  const EpochSet toy = separable_toy_set();
  TrainConfig config = toy_train_config(toy, 3);
  MlpModel model = build_model(config.model);
  const Metrics metrics = rawbci::evaluate(model, toy);

  const std::string prefix = testing::TempDir() + "export";
  rawbci::export_history(history, metrics, config, prefix);

  std::ifstream csv(prefix + "_history.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "epoch,train_loss,train_acc,val_loss,val_acc");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  EXPECT_EQ(rows, 3);

  const rawbci::json parsed =
      rawbci::parse_json_file(prefix + "_metrics.json");
  const rawbci::json reparsed = rawbci::json::parse(parsed.dump(2));
  EXPECT_EQ(parsed, reparsed);

  int confusion_total = 0;
  for (const auto& row : parsed["confusion"]) {
    for (const auto& cell : row) confusion_total += cell.get<int>();
  }
  EXPECT_EQ(confusion_total, parsed["n_samples"].get<int>());
  EXPECT_EQ(parsed["feature_dim"].get<std::size_t>(), toy.feature_dim());
  EXPECT_EQ(parsed["config"]["epochs"].get<std::size_t>(), config.epochs);
}
