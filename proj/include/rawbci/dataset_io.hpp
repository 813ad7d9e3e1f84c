#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rawbci/json_util.hpp"
#include "rawbci/recording.hpp"

namespace rawbci {

// On-disk session format, two files per recording:
//  - data CSV: UTF-8, first line the channel-name header, then one sample
//    per row of decimal floats. No timestamp column; time is implicit in
//    the sidecar's sampling_rate_hz. Values are written with 17 significant
//    digits so a write/load round trip is bit-exact.
//  - JSON sidecar: format_version, modality, sampling_rate_hz, subject_id,
//    schedule and label_map.

namespace detail {

inline std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline double parse_csv_double(std::string_view cell, const std::string& path,
                               std::size_t line_no, std::size_t col_no) {
  // trim spaces and a trailing \r from CRLF files
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
    cell.remove_prefix(1);
  }
  while (!cell.empty() &&
         (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw std::runtime_error(path + ": non-numeric cell at line " +
                             std::to_string(line_no) + ", column " +
                             std::to_string(col_no));
  }
  return v;
}

}  // namespace detail

inline json schedule_to_json(const SessionSchedule& s) {
  return json{{"class_labels", s.class_labels},
              {"activity_seconds", s.activity_seconds},
              {"rest_seconds", s.rest_seconds},
              {"repetitions", s.repetitions},
              {"initial_offset_seconds", s.initial_offset_seconds}};
}

inline SessionSchedule schedule_from_json(const json& j,
                                          const std::string& context) {
  check_keys(j,
             {"class_labels", "activity_seconds", "rest_seconds",
              "repetitions", "initial_offset_seconds"},
             context);
  SessionSchedule s;
  s.class_labels = require_key(j, "class_labels", context)
                       .get<std::vector<int>>();
  s.activity_seconds = require_key(j, "activity_seconds", context)
                           .get<double>();
  s.rest_seconds = require_key(j, "rest_seconds", context).get<double>();
  s.repetitions = require_key(j, "repetitions", context).get<std::size_t>();
  s.initial_offset_seconds =
      require_key(j, "initial_offset_seconds", context).get<double>();
  return s;
}

inline void write_recording(const Recording& rec, const std::string& data_path,
                            const std::string& meta_path) {
  rec.validate();
  std::ofstream data(data_path);
  if (!data) {
    throw std::runtime_error("cannot open for writing: " + data_path);
  }
  for (std::size_t c = 0; c < rec.channel_names.size(); ++c) {
    if (c) data << ',';
    data << rec.channel_names[c];
  }
  data << '\n';
  char buf[40];
  std::string line;
  for (std::size_t i = 0; i < rec.n_samples(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < rec.n_channels(); ++j) {
      if (j) line += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", rec.samples(i, j));
      line += buf;
    }
    line += '\n';
    data << line;
  }
  if (!data) {
    throw std::runtime_error("write failed: " + data_path);
  }

  json meta{{"format_version", 1},
            {"modality", modality_name(rec.modality)},
            {"sampling_rate_hz", rec.sampling_rate_hz},
            {"subject_id", rec.subject_id},
            {"schedule", schedule_to_json(rec.schedule)},
            {"label_map", rec.label_map.names()}};
  std::ofstream metaf(meta_path);
  if (!metaf) {
    throw std::runtime_error("cannot open for writing: " + meta_path);
  }
  metaf << meta.dump(2) << '\n';
  if (!metaf) {
    throw std::runtime_error("write failed: " + meta_path);
  }
}

/// Loads a raw session from its CSV + JSON sidecar pair and validates
/// shapes and schedule. Cell-level problems are reported with their line
/// and column.
inline Recording load_recording(const std::string& data_path,
                                const std::string& meta_path) {
  const json meta = parse_json_file(meta_path);
  check_keys(meta,
             {"format_version", "modality", "sampling_rate_hz", "subject_id",
              "schedule", "label_map"},
             meta_path);
  const int version = require_key(meta, "format_version", meta_path).get<int>();
  if (version != 1) {
    throw std::runtime_error(meta_path + ": unsupported format_version " +
                             std::to_string(version));
  }

  Recording rec;
  rec.modality = modality_from_name(
      require_key(meta, "modality", meta_path).get<std::string>());
  rec.sampling_rate_hz =
      require_key(meta, "sampling_rate_hz", meta_path).get<double>();
  rec.subject_id = require_key(meta, "subject_id", meta_path)
                       .get<std::string>();
  rec.schedule = schedule_from_json(require_key(meta, "schedule", meta_path),
                                    meta_path + ": schedule");
  rec.label_map = LabelMap(require_key(meta, "label_map", meta_path)
                               .get<std::vector<std::string>>());

  std::ifstream data(data_path);
  if (!data) {
    throw std::runtime_error("cannot open data file: " + data_path);
  }
  std::string line;
  if (!std::getline(data, line)) {
    throw std::runtime_error(data_path + ": no samples (empty file)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (const auto header_cell : detail::split_line(line)) {
    rec.channel_names.emplace_back(header_cell);
  }
  const std::size_t n_channels = rec.channel_names.size();

  std::vector<double> values;
  std::size_t n_rows = 0;
  std::size_t line_no = 1;
  while (std::getline(data, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto cells = detail::split_line(line);
    if (cells.size() != n_channels) {
      throw std::runtime_error(
          data_path + ": line " + std::to_string(line_no) + " has " +
          std::to_string(cells.size()) + " columns, header declares " +
          std::to_string(n_channels));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values.push_back(
          detail::parse_csv_double(cells[c], data_path, line_no, c + 1));
    }
    ++n_rows;
  }
  if (n_rows == 0) {
    throw std::runtime_error(data_path + ": no samples");
  }
  rec.samples = Matrix(n_rows, n_channels);
  rec.samples.data() = std::move(values);
  rec.validate();
  return rec;
}

/// Optional flat export of an epoch set: header f0..f{D-1},label, then one
/// epoch per row with the integer label in the final column.
inline void write_epochset_csv(const EpochSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  for (std::size_t j = 0; j < set.feature_dim(); ++j) {
    out << 'f' << j << ',';
  }
  out << "label\n";
  char buf[40];
  std::string line;
  for (std::size_t i = 0; i < set.size(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < set.feature_dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", set.features(i, j));
      line += buf;
      line += ',';
    }
    line += std::to_string(set.labels[i]);
    line += '\n';
    out << line;
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

inline EpochSet read_epochset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open epoch CSV: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty epoch CSV");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_line(line);
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(path +
                             ": epoch CSV header must end with 'label'");
  }
  const std::size_t dim = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto cells = detail::split_line(line);
    if (cells.size() != dim + 1) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               " has " + std::to_string(cells.size()) +
                               " columns, expected " +
                               std::to_string(dim + 1));
    }
    for (std::size_t c = 0; c < dim; ++c) {
      values.push_back(
          detail::parse_csv_double(cells[c], path, line_no, c + 1));
    }
    const double label_value =
        detail::parse_csv_double(cells[dim], path, line_no, dim + 1);
    const int label = static_cast<int>(label_value);
    if (static_cast<double>(label) != label_value || label < 0) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": label must be a non-negative integer");
    }
    labels.push_back(label);
  }
  if (labels.empty()) {
    throw std::runtime_error(path + ": epoch CSV has no rows");
  }
  EpochSet set;
  set.features = Matrix(labels.size(), dim);
  set.features.data() = std::move(values);
  set.labels = std::move(labels);
  set.provenance.resize(set.labels.size());
  return set;
}

}  // namespace rawbci
