#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/model.hpp"

namespace rawbci {

// Checkpoint file: a self-describing text format, one value space per
// header field, then shape-tagged tensors of decimal floats.
//
//   RAWBCI_CHECKPOINT 1
//   input_dim <n>
//   hidden <h1> <h2>
//   n_classes <c>
//   leaky_slope <v> ... (remaining config fields)
//   tensor <name> <rows> <cols>
//   <cols values per line, rows lines, %.17g>
//   ...
//   END
//
// 17 significant digits round-trip IEEE doubles exactly, so save -> load
// reproduces inference bitwise.

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("checkpoint: bad float '" + token + "' in " +
                             where);
  }
  return v;
}

}  // namespace detail

inline void save_checkpoint(MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  }
  const ModelConfig& c = model.config();
  out << "RAWBCI_CHECKPOINT 1\n";
  out << "input_dim " << c.input_dim << "\n";
  out << "hidden " << c.hidden_dims[0] << " " << c.hidden_dims[1] << "\n";
  out << "n_classes " << c.n_classes << "\n";
  out << "leaky_slope " << detail::format_double(c.leaky_slope) << "\n";
  out << "bn_epsilon " << detail::format_double(c.bn_epsilon) << "\n";
  out << "bn_momentum " << detail::format_double(c.bn_momentum) << "\n";
  out << "init_scale " << detail::format_double(c.init_scale) << "\n";
  out << "seed " << c.seed << "\n";

  auto write_tensor = [&out](const std::string& name, const Matrix& m) {
    out << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j) out << ' ';
        out << detail::format_double(m(i, j));
      }
      out << '\n';
    }
  };

  const auto params = model.parameters();
  const auto param_names = MlpModel::parameter_names();
  for (std::size_t k = 0; k < params.size(); ++k) {
    write_tensor(param_names[k], *params[k]);
  }
  const auto stats = model.running_stats();
  const auto stat_names = MlpModel::state_names();
  for (std::size_t k = 0; k < stats.size(); ++k) {
    write_tensor(stat_names[k], *stats[k]);
  }
  out << "END\n";
  if (!out) {
    throw std::runtime_error("checkpoint: write failed: " + path);
  }
}

inline MlpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("checkpoint: cannot open: " + path);
  }
  std::string line;
  auto next_line = [&](const std::string& what) -> std::string {
    if (!std::getline(in, line)) {
      throw std::runtime_error("checkpoint: truncated file, expected " + what);
    }
    return line;
  };

  {
    std::istringstream header(next_line("header"));
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != "RAWBCI_CHECKPOINT") {
      throw std::runtime_error("checkpoint: not a checkpoint file: " + path);
    }
    if (version != 1) {
      throw std::runtime_error("checkpoint: unsupported format version " +
                               std::to_string(version));
    }
  }

  ModelConfig config;
  auto read_field = [&](const std::string& key) -> std::istringstream {
    std::istringstream ss(next_line("field " + key));
    std::string got;
    ss >> got;
    if (got != key) {
      throw std::runtime_error("checkpoint: expected field '" + key +
                               "', got '" + got + "'");
    }
    return ss;
  };
  read_field("input_dim") >> config.input_dim;
  {
    auto ss = read_field("hidden");
    ss >> config.hidden_dims[0] >> config.hidden_dims[1];
  }
  read_field("n_classes") >> config.n_classes;
  std::string token;
  read_field("leaky_slope") >> token;
  config.leaky_slope = detail::parse_double(token, "leaky_slope");
  read_field("bn_epsilon") >> token;
  config.bn_epsilon = detail::parse_double(token, "bn_epsilon");
  read_field("bn_momentum") >> token;
  config.bn_momentum = detail::parse_double(token, "bn_momentum");
  read_field("init_scale") >> token;
  config.init_scale = detail::parse_double(token, "init_scale");
  read_field("seed") >> config.seed;
  config.validate();

  MlpModel model(config);

  auto read_tensor = [&](const std::string& expected_name, Matrix& target) {
    std::istringstream ss(next_line("tensor " + expected_name));
    std::string kw, name;
    std::size_t rows = 0, cols = 0;
    ss >> kw >> name >> rows >> cols;
    if (kw != "tensor" || name != expected_name) {
      throw std::runtime_error("checkpoint: expected tensor '" +
                               expected_name + "', got '" + kw + " " + name +
                               "'");
    }
    if (rows != target.rows() || cols != target.cols()) {
      throw std::runtime_error(
          "checkpoint: tensor " + name + " has shape " +
          Matrix::shape_string(rows, cols) + " but config implies " +
          target.shape());
    }
    for (std::size_t i = 0; i < rows; ++i) {
      std::istringstream row(next_line("row " + std::to_string(i) + " of " +
                                       name));
      for (std::size_t j = 0; j < cols; ++j) {
        std::string cell;
        if (!(row >> cell)) {
          throw std::runtime_error("checkpoint: tensor " + name + " row " +
                                   std::to_string(i) + " has fewer than " +
                                   std::to_string(cols) + " values");
        }
        target(i, j) = detail::parse_double(
            cell, name + " row " + std::to_string(i));
      }
      std::string extra;
      if (row >> extra) {
        throw std::runtime_error("checkpoint: tensor " + name + " row " +
                                 std::to_string(i) + " has extra values");
      }
    }
  };

  const auto params = model.parameters();
  const auto param_names = MlpModel::parameter_names();
  for (std::size_t k = 0; k < params.size(); ++k) {
    read_tensor(param_names[k], *params[k]);
  }
  const auto stats = model.running_stats();
  const auto stat_names = MlpModel::state_names();
  for (std::size_t k = 0; k < stats.size(); ++k) {
    read_tensor(stat_names[k], *stats[k]);
  }
  if (next_line("END") != "END") {
    throw std::runtime_error("checkpoint: missing END marker");
  }
  return model;
}

}  // namespace rawbci
