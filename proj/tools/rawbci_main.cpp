// rawbci: reproducible raw-biosignal activity classification runs.
// Subcommands: gen, train, eval, predict. All run state lives in the JSON
// run spec; flags only select paths.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rawbci/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"End-to-end classifier for raw multichannel activity "
               "recordings"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string checkpoint_path;
  std::string data_path;

  CLI::App* gen = app.add_subcommand(
      "gen", "Generate a synthetic dataset from a run spec");
  gen->add_option("--config", config_path, "Run spec JSON")->required();
  gen->add_option("--out", out_path, "Dataset directory (default "
                                     "<out_dir>/dataset)");

  CLI::App* train = app.add_subcommand(
      "train", "Train on the dataset named by the run spec");
  train->add_option("--config", config_path, "Run spec JSON")->required();
  train->add_option("--out", out_path, "Output directory override");

  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate a checkpoint on the run spec's test split");
  eval->add_option("--config", config_path, "Run spec JSON")->required();
  eval->add_option("--checkpoint", checkpoint_path,
                   "Checkpoint path (default <out_dir>/model.ckpt)");
  eval->add_option("--out", out_path, "Output directory override");

  CLI::App* predict = app.add_subcommand(
      "predict", "Classify an exported epoch CSV with a checkpoint");
  predict->add_option("--checkpoint", checkpoint_path, "Checkpoint path")
      ->required();
  predict->add_option("--data", data_path, "Epoch CSV path")->required();
  predict->add_option("--out", out_path,
                      "Predictions CSV (default predictions.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const rawbci::RunSpec spec = rawbci::load_runspec(config_path);
      const std::string manifest = rawbci::run_gen(spec, out_path);
      std::cout << manifest << "\n";
      return 0;
    }
    if (train->parsed()) {
      const rawbci::RunSpec spec = rawbci::load_runspec(config_path);
      const rawbci::TrainOutputs outputs = rawbci::run_train(spec, out_path);
      std::printf("test_accuracy %.6f\n", outputs.test_metrics.accuracy);
      std::cout << outputs.checkpoint_path << "\n";
      return 0;
    }
    if (eval->parsed()) {
      const rawbci::RunSpec spec = rawbci::load_runspec(config_path);
      if (checkpoint_path.empty()) {
        checkpoint_path = spec.out_dir + "/model.ckpt";
      }
      const rawbci::Metrics metrics =
          rawbci::run_eval(spec, checkpoint_path, out_path);
      std::printf("accuracy %.6f over %zu samples\n", metrics.accuracy,
                  metrics.n_samples);
      for (std::size_t i = 0; i < metrics.confusion.size(); ++i) {
        for (std::size_t j = 0; j < metrics.confusion[i].size(); ++j) {
          std::cout << (j ? " " : "") << metrics.confusion[i][j];
        }
        std::cout << "\n";
      }
      return 0;
    }
    if (predict->parsed()) {
      if (out_path.empty()) out_path = "predictions.csv";
      rawbci::run_predict(checkpoint_path, data_path, out_path);
      std::cout << out_path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
