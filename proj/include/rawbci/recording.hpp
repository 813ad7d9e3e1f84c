#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/matrix.hpp"

namespace rawbci {

/// Acquisition modality. The enum order is the fixed fusion order.
enum class Modality { FNIRS = 0, EEG = 1, MOCAP = 2 };

inline std::string modality_name(Modality m) {
  switch (m) {
    case Modality::FNIRS: return "fnirs";
    case Modality::EEG: return "eeg";
    case Modality::MOCAP: return "mocap";
  }
  throw std::invalid_argument("modality_name: bad enum value");
}

inline Modality modality_from_name(const std::string& name) {
  if (name == "fnirs") return Modality::FNIRS;
  if (name == "eeg") return Modality::EEG;
  if (name == "mocap") return Modality::MOCAP;
  throw std::invalid_argument("unknown modality '" + name +
                              "' (expected fnirs, eeg or mocap)");
}

/// Ordered class names; ids are the dense indices 0..n-1.
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
      throw std::invalid_argument("label map: must name at least one class");
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
      for (std::size_t j = i + 1; j < names_.size(); ++j) {
        if (names_[i] == names_[j]) {
          throw std::invalid_argument("label map: duplicate class name '" +
                                      names_[i] + "'");
        }
      }
    }
  }

  static LabelMap default_activities() {
    return LabelMap({"right_arm", "left_arm", "right_leg", "left_leg",
                     "both_arms"});
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const LabelMap& other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
};

/// Timing protocol of one session: the class order of one cycle, repeated
/// `repetitions` times, each block being activity_seconds of movement
/// followed by rest_seconds of rest.
struct SessionSchedule {
  std::vector<int> class_labels;
  double activity_seconds = 10.0;
  double rest_seconds = 20.0;
  std::size_t repetitions = 5;
  double initial_offset_seconds = 0.0;

  std::size_t blocks_per_cycle() const { return class_labels.size(); }
  std::size_t total_blocks() const { return class_labels.size() * repetitions; }

  double block_seconds() const { return activity_seconds + rest_seconds; }

  double total_seconds() const {
    return initial_offset_seconds +
           static_cast<double>(total_blocks()) * block_seconds();
  }

  /// Class id of block b in performance order (cycles repeated in order).
  int block_class(std::size_t b) const {
    return class_labels[b % class_labels.size()];
  }

  double block_start_seconds(std::size_t b) const {
    return initial_offset_seconds + static_cast<double>(b) * block_seconds();
  }

  void validate(std::size_t n_classes) const {
    if (class_labels.empty()) {
      throw std::invalid_argument("schedule: class_labels is empty");
    }
    for (int c : class_labels) {
      if (c < 0 || static_cast<std::size_t>(c) >= n_classes) {
        throw std::invalid_argument("schedule: class id " + std::to_string(c) +
                                    " outside label map of size " +
                                    std::to_string(n_classes));
      }
    }
    if (activity_seconds <= 0.0) {
      throw std::invalid_argument("schedule: activity_seconds must be > 0");
    }
    if (rest_seconds < 0.0) {
      throw std::invalid_argument("schedule: rest_seconds must be >= 0");
    }
    if (repetitions == 0) {
      throw std::invalid_argument("schedule: repetitions must be >= 1");
    }
    if (initial_offset_seconds < 0.0) {
      throw std::invalid_argument(
          "schedule: initial_offset_seconds must be >= 0");
    }
  }
};

/// One modality's raw session, exactly as recorded. The pipeline never
/// filters, detrends or resamples these values.
struct Recording {
  Modality modality = Modality::FNIRS;
  double sampling_rate_hz = 0.0;
  std::vector<std::string> channel_names;
  Matrix samples;  // n_samples x n_channels
  std::string subject_id;
  SessionSchedule schedule;
  LabelMap label_map;

  std::size_t n_samples() const { return samples.rows(); }
  std::size_t n_channels() const { return samples.cols(); }
  double duration_seconds() const {
    return static_cast<double>(n_samples()) / sampling_rate_hz;
  }

  /// Shape and schedule consistency. The schedule is accepted when the
  /// recording length is within one activity+rest block of the scheduled
  /// total duration.
  void validate() const {
    if (sampling_rate_hz <= 0.0) {
      throw std::invalid_argument("recording: sampling_rate_hz must be > 0");
    }
    if (samples.empty()) {
      throw std::invalid_argument("recording: no samples");
    }
    if (channel_names.size() != n_channels()) {
      throw std::invalid_argument(
          "recording: " + std::to_string(channel_names.size()) +
          " channel names for " + std::to_string(n_channels()) +
          " sample columns");
    }
    schedule.validate(label_map.size());
    const double expected = schedule.total_seconds();
    const double actual = duration_seconds();
    if (std::abs(actual - expected) > schedule.block_seconds()) {
      throw std::invalid_argument(
          "recording: schedule mismatch, scheduled " +
          std::to_string(expected) + " s but recording holds " +
          std::to_string(actual) + " s of samples");
    }
  }
};

/// Per-epoch origin: which subject and trial it was cut from and which
/// modalities contributed features.
struct EpochProvenance {
  std::string subject_id;
  int trial_index = 0;
  std::vector<Modality> modalities;
};

/// Flattened feature rows with labels; the classifier's input.
struct EpochSet {
  Matrix features;  // n_epochs x feature_dim
  std::vector<int> labels;
  std::vector<EpochProvenance> provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return features.cols(); }

  void validate(std::size_t n_classes) const {
    if (features.rows() != labels.size() ||
        labels.size() != provenance.size()) {
      throw std::invalid_argument("epoch set: row/label/provenance count mismatch");
    }
    for (int label : labels) {
      if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
        throw std::invalid_argument("epoch set: label " +
                                    std::to_string(label) + " outside [0, " +
                                    std::to_string(n_classes) + ")");
      }
    }
  }
};

}  // namespace rawbci
