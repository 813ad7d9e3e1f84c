#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/checkpoint.hpp"
#include "rawbci/dataset_io.hpp"
#include "rawbci/epochs.hpp"
#include "rawbci/runspec.hpp"
#include "rawbci/synthgen.hpp"
#include "rawbci/train.hpp"

namespace rawbci {

// End-to-end commands behind the CLI; the executable is a thin argument
// parser over these functions.

/// `gen`: write the synthetic dataset; returns the manifest path.
inline std::string run_gen(const RunSpec& spec, const std::string& out_dir) {
  const std::string target =
      out_dir.empty() ? spec.out_dir + "/dataset" : out_dir;
  return write_dataset(spec.synth, target).path;
}

/// Loads every recording named by a manifest, epochs and flattens each one,
/// fuses modalities within a subject, and stacks subjects in manifest
/// order. All sidecars must agree on the label map.
inline EpochSet load_epochs_from_manifest(const std::string& manifest_path,
                                          LabelMap& label_map_out) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  if (manifest.files.empty()) {
    throw std::runtime_error(manifest_path + ": manifest lists no files");
  }
  const std::filesystem::path base =
      std::filesystem::path(manifest_path).parent_path();

  std::vector<std::string> subject_order;
  std::map<std::string, std::vector<EpochSet>> by_subject;
  bool have_label_map = false;
  LabelMap label_map;
  for (const DatasetFile& file : manifest.files) {
    const Recording rec = load_recording((base / file.data).string(),
                                         (base / file.meta).string());
    if (!have_label_map) {
      label_map = rec.label_map;
      have_label_map = true;
    } else if (!(label_map == rec.label_map)) {
      throw std::runtime_error(manifest_path +
                               ": recordings disagree on the label map (" +
                               file.data + ")");
    }
    if (by_subject.find(rec.subject_id) == by_subject.end()) {
      subject_order.push_back(rec.subject_id);
    }
    by_subject[rec.subject_id].push_back(make_epochset(rec));
  }

  std::vector<EpochSet> fused_subjects;
  for (const std::string& subject : subject_order) {
    fused_subjects.push_back(fuse_modalities(by_subject[subject]));
  }
  label_map_out = label_map;
  return concat_epochsets(fused_subjects);
}

struct TrainOutputs {
  std::string checkpoint_path;
  std::string history_csv_path;
  std::string metrics_json_path;
  std::string test_epochs_path;
  Metrics test_metrics;
  std::size_t feature_dim = 0;
};

/// `train`: manifest -> epochs -> fusion -> stratified split -> model ->
/// training -> test evaluation; writes checkpoint, history CSV, metrics
/// JSON and the test split CSV into the output directory.
inline TrainOutputs run_train(const RunSpec& spec,
                              const std::string& out_dir_override = "") {
  const std::string out_dir =
      out_dir_override.empty() ? spec.out_dir : out_dir_override;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("train: cannot create output directory " +
                             out_dir + ": " + ec.message());
  }

  LabelMap label_map;
  const EpochSet all = load_epochs_from_manifest(spec.manifest_path(),
                                                 label_map);

  TrainConfig config = spec.train;
  config.model = spec.model;
  if (config.model.input_dim == 0) {
    config.model.input_dim = all.feature_dim();
  } else if (config.model.input_dim != all.feature_dim()) {
    throw std::runtime_error(
        "train: config input_dim " + std::to_string(config.model.input_dim) +
        " does not match data feature dim " +
        std::to_string(all.feature_dim()));
  }
  if (config.model.n_classes != label_map.size()) {
    if (config.model.n_classes != ModelConfig().n_classes) {
      throw std::runtime_error(
          "train: config n_classes " + std::to_string(config.model.n_classes) +
          " does not match label map size " +
          std::to_string(label_map.size()));
    }
    config.model.n_classes = label_map.size();
  }
  config.validate();

  const Split split = split_stratified(all, config.split, config.seed);
  MlpModel model = build_model(config.model);
  const History history = train(model, split.train, split.val, config);
  const Metrics metrics = evaluate(model, split.test);

  TrainOutputs outputs;
  outputs.feature_dim = all.feature_dim();
  outputs.test_metrics = metrics;
  const std::filesystem::path out(out_dir);
  outputs.checkpoint_path = (out / "model.ckpt").string();
  save_checkpoint(model, outputs.checkpoint_path);
  export_history(history, metrics, config, (out / "run").string());
  outputs.history_csv_path = (out / "run_history.csv").string();
  outputs.metrics_json_path = (out / "run_metrics.json").string();
  outputs.test_epochs_path = (out / "test_epochs.csv").string();
  write_epochset_csv(split.test, outputs.test_epochs_path);
  return outputs;
}

/// `eval`: rebuild the epoch set and test split from the run spec, load the
/// checkpoint, evaluate, write <out>/eval_metrics.json.
inline Metrics run_eval(const RunSpec& spec, const std::string& checkpoint_path,
                        const std::string& out_dir_override = "") {
  MlpModel model = load_checkpoint(checkpoint_path);

  LabelMap label_map;
  const EpochSet all = load_epochs_from_manifest(spec.manifest_path(),
                                                 label_map);
  if (model.config().input_dim != all.feature_dim()) {
    throw std::runtime_error(
        "eval: checkpoint expects " +
        std::to_string(model.config().input_dim) +
        " features but the data provides " +
        std::to_string(all.feature_dim()));
  }
  const Split split = split_stratified(all, spec.train.split, spec.train.seed);
  const Metrics metrics = evaluate(model, split.test);

  const std::string out_dir =
      out_dir_override.empty() ? spec.out_dir : out_dir_override;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("eval: cannot create output directory " +
                             out_dir + ": " + ec.message());
  }
  TrainConfig config = spec.train;
  config.model = model.config();
  json doc = metrics_to_json(metrics);
  doc["feature_dim"] = model.config().input_dim;
  doc["config"] = train_config_to_json(config);
  doc["seed"] = config.seed;
  doc["checkpoint"] = checkpoint_path;
  const std::string metrics_path =
      (std::filesystem::path(out_dir) / "eval_metrics.json").string();
  std::ofstream out(metrics_path);
  if (!out) {
    throw std::runtime_error("eval: cannot open " + metrics_path);
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("eval: write failed: " + metrics_path);
  }
  return metrics;
}

/// `predict`: classify an exported epoch CSV and write one row per epoch of
/// (epoch index, predicted class id, class name).
inline void run_predict(const std::string& checkpoint_path,
                        const std::string& epochs_csv_path,
                        const std::string& out_csv_path,
                        const LabelMap* names = nullptr) {
  MlpModel model = load_checkpoint(checkpoint_path);
  const EpochSet set = read_epochset_csv(epochs_csv_path);
  if (set.feature_dim() != model.config().input_dim) {
    throw std::runtime_error(
        "predict: checkpoint expects " +
        std::to_string(model.config().input_dim) +
        " features but the CSV provides " +
        std::to_string(set.feature_dim()));
  }
  LabelMap label_map;
  if (names != nullptr) {
    label_map = *names;
  } else if (model.config().n_classes == LabelMap::default_activities().size()) {
    label_map = LabelMap::default_activities();
  } else {
    std::vector<std::string> generic;
    for (std::size_t c = 0; c < model.config().n_classes; ++c) {
      generic.push_back("class_" + std::to_string(c));
    }
    label_map = LabelMap(generic);
  }
  if (label_map.size() != model.config().n_classes) {
    throw std::runtime_error(
        "predict: label map names " + std::to_string(label_map.size()) +
        " classes but the checkpoint has " +
        std::to_string(model.config().n_classes));
  }

  const std::vector<int> predicted = model.predict(set.features);
  std::ofstream out(out_csv_path);
  if (!out) {
    throw std::runtime_error("predict: cannot open " + out_csv_path);
  }
  out << "epoch_index,predicted_class,class_name\n";
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    out << i << ',' << predicted[i] << ','
        << label_map.name(static_cast<std::size_t>(predicted[i])) << '\n';
  }
  if (!out) {
    throw std::runtime_error("predict: write failed: " + out_csv_path);
  }
}

}  // namespace rawbci
