#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "rawbci/json_util.hpp"
#include "rawbci/model.hpp"
#include "rawbci/synthgen.hpp"
#include "rawbci/train.hpp"

namespace rawbci {

/// One JSON file describing a complete reproducible run: generator
/// settings, data source, model and training hyperparameters, output
/// directory. Every field is optional with module defaults; unknown keys
/// are rejected at every level. model.input_dim and model.n_classes are
/// normally derived from the data and, when given, must match it.
struct RunSpec {
  std::string out_dir = "runs/out";
  SynthConfig synth;
  std::string data_manifest;  // empty -> <out_dir>/dataset/manifest.json
  ModelConfig model;
  TrainConfig train;

  std::string manifest_path() const {
    if (!data_manifest.empty()) return data_manifest;
    return out_dir + "/dataset/manifest.json";
  }
};

namespace detail {

inline void parse_modality_settings(const json& j, ModalitySettings& out,
                                    const std::string& context) {
  check_keys(j, {"enabled", "sampling_rate_hz", "n_channels"}, context);
  if (j.contains("enabled")) out.enabled = j["enabled"].get<bool>();
  if (j.contains("sampling_rate_hz")) {
    out.sampling_rate_hz = j["sampling_rate_hz"].get<double>();
  }
  if (j.contains("n_channels")) {
    out.n_channels = j["n_channels"].get<std::size_t>();
  }
}

inline void parse_synth(const json& j, SynthConfig& out,
                        const std::string& context) {
  check_keys(j,
             {"n_subjects", "label_map", "modalities", "schedule",
              "signal_amplitude", "snr", "seed"},
             context);
  if (j.contains("n_subjects")) {
    out.n_subjects = j["n_subjects"].get<std::size_t>();
  }
  if (j.contains("label_map")) {
    out.label_map = LabelMap(j["label_map"].get<std::vector<std::string>>());
  }
  if (j.contains("modalities")) {
    const json& mods = j["modalities"];
    check_keys(mods, {"fnirs", "eeg", "mocap"}, context + ".modalities");
    for (ModalitySettings& settings : out.modalities) {
      const std::string name = modality_name(settings.modality);
      if (mods.contains(name)) {
        parse_modality_settings(mods[name], settings,
                                context + ".modalities." + name);
      }
    }
  }
  if (j.contains("schedule")) {
    out.schedule = schedule_from_json(j["schedule"], context + ".schedule");
  }
  if (j.contains("signal_amplitude")) {
    out.signal_amplitude = j["signal_amplitude"].get<double>();
  }
  if (j.contains("snr")) out.snr = j["snr"].get<double>();
  if (j.contains("seed")) out.seed = j["seed"].get<std::uint64_t>();
}

inline void parse_model(const json& j, ModelConfig& out,
                        const std::string& context) {
  check_keys(j,
             {"input_dim", "hidden_dims", "n_classes", "leaky_slope",
              "bn_epsilon", "bn_momentum", "init_scale", "seed"},
             context);
  if (j.contains("input_dim")) {
    out.input_dim = j["input_dim"].get<std::size_t>();
  }
  if (j.contains("hidden_dims")) {
    const auto dims = j["hidden_dims"].get<std::vector<std::size_t>>();
    if (dims.size() != 2) {
      throw std::runtime_error(context +
                               ".hidden_dims: exactly 2 hidden layers");
    }
    out.hidden_dims = {dims[0], dims[1]};
  }
  if (j.contains("n_classes")) {
    out.n_classes = j["n_classes"].get<std::size_t>();
  }
  if (j.contains("leaky_slope")) {
    out.leaky_slope = j["leaky_slope"].get<double>();
  }
  if (j.contains("bn_epsilon")) {
    out.bn_epsilon = j["bn_epsilon"].get<double>();
  }
  if (j.contains("bn_momentum")) {
    out.bn_momentum = j["bn_momentum"].get<double>();
  }
  if (j.contains("init_scale")) {
    out.init_scale = j["init_scale"].get<double>();
  }
  if (j.contains("seed")) out.seed = j["seed"].get<std::uint64_t>();
}

inline void parse_train(const json& j, TrainConfig& out,
                        const std::string& context) {
  check_keys(j,
             {"epochs", "batch_size", "learning_rate", "beta1", "beta2",
              "adam_epsilon", "split", "seed"},
             context);
  if (j.contains("epochs")) out.epochs = j["epochs"].get<std::size_t>();
  if (j.contains("batch_size")) {
    out.batch_size = j["batch_size"].get<std::size_t>();
  }
  if (j.contains("learning_rate")) {
    out.adam.learning_rate = j["learning_rate"].get<double>();
  }
  if (j.contains("beta1")) out.adam.beta1 = j["beta1"].get<double>();
  if (j.contains("beta2")) out.adam.beta2 = j["beta2"].get<double>();
  if (j.contains("adam_epsilon")) {
    out.adam.epsilon = j["adam_epsilon"].get<double>();
  }
  if (j.contains("split")) {
    const auto ratios = j["split"].get<std::vector<double>>();
    if (ratios.size() != 3) {
      throw std::runtime_error(context +
                               ".split: expected [train, val, test]");
    }
    out.split = SplitRatios{ratios[0], ratios[1], ratios[2]};
  }
  if (j.contains("seed")) out.seed = j["seed"].get<std::uint64_t>();
}

}  // namespace detail

inline RunSpec parse_runspec(const json& j, const std::string& context) {
  check_keys(j, {"format_version", "out_dir", "synth", "data", "model",
                 "train"},
             context);
  if (j.contains("format_version")) {
    const int version = j["format_version"].get<int>();
    if (version != 1) {
      throw std::runtime_error(context + ": unsupported format_version " +
                               std::to_string(version));
    }
  }
  RunSpec spec;
  if (j.contains("out_dir")) spec.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("synth")) {
    detail::parse_synth(j["synth"], spec.synth, context + ": synth");
  }
  if (j.contains("data")) {
    check_keys(j["data"], {"manifest"}, context + ": data");
    if (j["data"].contains("manifest")) {
      spec.data_manifest = j["data"]["manifest"].get<std::string>();
    }
  }
  if (j.contains("model")) {
    detail::parse_model(j["model"], spec.model, context + ": model");
  }
  if (j.contains("train")) {
    detail::parse_train(j["train"], spec.train, context + ": train");
  }
  return spec;
}

inline RunSpec load_runspec(const std::string& path) {
  return parse_runspec(parse_json_file(path), path);
}

}  // namespace rawbci
