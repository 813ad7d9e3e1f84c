#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/recording.hpp"
#include "rawbci/rng.hpp"

namespace rawbci {

/// One activity window cut at the native sampling rate, rest discarded.
struct Epoch {
  Matrix window;  // samples x channels, raw values
  int class_id = 0;
  int trial_index = 0;
};

/// First sample index of the activity window of block b, and the window
/// length in samples: floor(time * fs) on both, so a window never reads
/// past its block.
inline std::size_t block_start_sample(const SessionSchedule& s, std::size_t b,
                                      double fs) {
  return static_cast<std::size_t>(s.block_start_seconds(b) * fs);
}

inline std::size_t window_samples(const SessionSchedule& s, double fs) {
  return static_cast<std::size_t>(s.activity_seconds * fs);
}

/// Cuts one epoch per activity block, in performance order. Rest intervals
/// are discarded; the samples are copied untouched.
inline std::vector<Epoch> extract_epochs(const Recording& rec) {
  rec.validate();
  const double fs = rec.sampling_rate_hz;
  const std::size_t len = window_samples(rec.schedule, fs);
  if (len == 0) {
    throw std::invalid_argument(
        "extract_epochs: activity window shorter than one sample at " +
        std::to_string(fs) + " Hz");
  }
  std::vector<Epoch> epochs;
  epochs.reserve(rec.schedule.total_blocks());
  for (std::size_t b = 0; b < rec.schedule.total_blocks(); ++b) {
    const std::size_t start = block_start_sample(rec.schedule, b, fs);
    if (start + len > rec.n_samples()) {
      throw std::invalid_argument(
          "extract_epochs: block " + std::to_string(b) + " (class " +
          std::to_string(rec.schedule.block_class(b)) + ") window [" +
          std::to_string(start) + ", " + std::to_string(start + len) +
          ") extends past the recording end at sample " +
          std::to_string(rec.n_samples()));
    }
    Epoch e;
    e.class_id = rec.schedule.block_class(b);
    e.trial_index = static_cast<int>(b);
    e.window = Matrix(len, rec.n_channels());
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t j = 0; j < rec.n_channels(); ++j) {
        e.window(i, j) = rec.samples(start + i, j);
      }
    }
    epochs.push_back(std::move(e));
  }
  return epochs;
}

/// Flattens each window time-major (sample 0 all channels, sample 1 all
/// channels, ...) into one feature row. All windows must share one shape.
inline EpochSet flatten_epochs(const std::vector<Epoch>& epochs,
                               const std::string& subject_id,
                               Modality modality) {
  if (epochs.empty()) {
    throw std::invalid_argument("flatten_epochs: no epochs");
  }
  const std::size_t rows = epochs.front().window.rows();
  const std::size_t cols = epochs.front().window.cols();
  for (const Epoch& e : epochs) {
    if (e.window.rows() != rows || e.window.cols() != cols) {
      throw std::invalid_argument(
          "flatten_epochs: heterogeneous window shapes " +
          epochs.front().window.shape() + " vs " + e.window.shape());
    }
  }
  EpochSet set;
  set.features = Matrix(epochs.size(), rows * cols);
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    // row-major window copy is exactly the time-major flattening
    std::copy(epochs[e].window.data().begin(), epochs[e].window.data().end(),
              set.features.data().begin() + e * rows * cols);
    set.labels.push_back(epochs[e].class_id);
    set.provenance.push_back(
        EpochProvenance{subject_id, epochs[e].trial_index, {modality}});
  }
  return set;
}

inline EpochSet make_epochset(const Recording& rec) {
  return flatten_epochs(extract_epochs(rec), rec.subject_id, rec.modality);
}

/// Concatenates feature rows across modalities in the fixed order FNIRS,
/// EEG, MOCAP, aligned by trial index. Labels, counts and provenance must
/// agree across inputs; no resampling is performed.
inline EpochSet fuse_modalities(const std::vector<EpochSet>& per_modality) {
  if (per_modality.empty()) {
    throw std::invalid_argument("fuse_modalities: no inputs");
  }
  if (per_modality.size() == 1) {
    return per_modality.front();
  }
  std::vector<const EpochSet*> ordered;
  for (const EpochSet& s : per_modality) ordered.push_back(&s);
  auto modality_rank = [](const EpochSet& s) {
    if (s.provenance.empty() || s.provenance.front().modalities.empty()) {
      throw std::invalid_argument(
          "fuse_modalities: input set has no modality provenance");
    }
    return static_cast<int>(s.provenance.front().modalities.front());
  };
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const EpochSet* a, const EpochSet* b) {
                     return modality_rank(*a) < modality_rank(*b);
                   });

  const EpochSet& first = *ordered.front();
  const std::size_t n = first.size();
  std::size_t fused_dim = 0;
  for (const EpochSet* s : ordered) {
    if (s->size() != n) {
      throw std::invalid_argument(
          "fuse_modalities: epoch count mismatch, " + std::to_string(n) +
          " vs " + std::to_string(s->size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (s->labels[i] != first.labels[i]) {
        throw std::invalid_argument(
            "fuse_modalities: label mismatch at epoch " + std::to_string(i) +
            " (" + std::to_string(first.labels[i]) + " vs " +
            std::to_string(s->labels[i]) + ")");
      }
      if (s->provenance[i].trial_index != first.provenance[i].trial_index) {
        throw std::invalid_argument(
            "fuse_modalities: trial index mismatch at epoch " +
            std::to_string(i));
      }
      if (s->provenance[i].subject_id != first.provenance[i].subject_id) {
        throw std::invalid_argument(
            "fuse_modalities: subject mismatch at epoch " +
            std::to_string(i));
      }
    }
    fused_dim += s->feature_dim();
  }

  EpochSet fused;
  fused.features = Matrix(n, fused_dim);
  fused.labels = first.labels;
  for (std::size_t i = 0; i < n; ++i) {
    EpochProvenance p;
    p.subject_id = first.provenance[i].subject_id;
    p.trial_index = first.provenance[i].trial_index;
    for (const EpochSet* s : ordered) {
      for (Modality m : s->provenance[i].modalities) {
        p.modalities.push_back(m);
      }
    }
    fused.provenance.push_back(std::move(p));
    std::size_t offset = 0;
    for (const EpochSet* s : ordered) {
      for (std::size_t j = 0; j < s->feature_dim(); ++j) {
        fused.features(i, offset + j) = s->features(i, j);
      }
      offset += s->feature_dim();
    }
  }
  return fused;
}

/// Stacks epoch sets with identical feature dimensions.
inline EpochSet concat_epochsets(const std::vector<EpochSet>& sets) {
  if (sets.empty()) {
    throw std::invalid_argument("concat_epochsets: no inputs");
  }
  const std::size_t dim = sets.front().feature_dim();
  std::size_t total = 0;
  for (const EpochSet& s : sets) {
    if (s.feature_dim() != dim) {
      throw std::invalid_argument(
          "concat_epochsets: feature dim mismatch, " + std::to_string(dim) +
          " vs " + std::to_string(s.feature_dim()));
    }
    total += s.size();
  }
  EpochSet out;
  out.features = Matrix(total, dim);
  std::size_t row = 0;
  for (const EpochSet& s : sets) {
    std::copy(s.features.data().begin(), s.features.data().end(),
              out.features.data().begin() + row * dim);
    out.labels.insert(out.labels.end(), s.labels.begin(), s.labels.end());
    out.provenance.insert(out.provenance.end(), s.provenance.begin(),
                          s.provenance.end());
    row += s.size();
  }
  return out;
}

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;

  void validate() const {
    if (train <= 0.0 || val <= 0.0 || test <= 0.0) {
      throw std::invalid_argument("split ratios: all three must be > 0");
    }
    if (std::abs(train + val + test - 1.0) > 1e-9) {
      throw std::invalid_argument("split ratios: must sum to 1");
    }
  }
};

struct Split {
  EpochSet train;
  EpochSet val;
  EpochSet test;
};

namespace detail {

inline EpochSet take_rows(const EpochSet& set,
                          const std::vector<std::size_t>& rows) {
  EpochSet out;
  out.features = Matrix(rows.size(), set.feature_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < set.feature_dim(); ++j) {
      out.features(i, j) = set.features(rows[i], j);
    }
    out.labels.push_back(set.labels[rows[i]]);
    out.provenance.push_back(set.provenance[rows[i]]);
  }
  return out;
}

/// Largest-remainder apportionment of n into three parts, then a floor of
/// one per part enforced by stealing from the largest part.
inline std::array<std::size_t, 3> apportion(std::size_t n,
                                            const SplitRatios& ratios) {
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = static_cast<double>(n) * r[k];
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (remainder[k] > remainder[best]) best = k;
    }
    counts[best] += 1;
    remainder[best] = -1.0;
    ++assigned;
  }
  for (int k = 0; k < 3; ++k) {
    while (counts[k] == 0) {
      int largest = 0;
      for (int j = 1; j < 3; ++j) {
        if (counts[j] > counts[largest]) largest = j;
      }
      counts[largest] -= 1;
      counts[k] += 1;
    }
  }
  return counts;
}

}  // namespace detail

/// Per-class seeded shuffle, then contiguous assignment by ratio with
/// largest-remainder rounding. Every class lands in every partition; the
/// three partitions are disjoint and cover the input.
inline Split split_stratified(const EpochSet& set, const SplitRatios& ratios,
                              std::uint64_t seed) {
  ratios.validate();
  if (set.size() == 0) {
    throw std::invalid_argument("split: empty epoch set");
  }
  int max_label = 0;
  for (int label : set.labels) max_label = std::max(max_label, label);
  const std::size_t n_classes = static_cast<std::size_t>(max_label) + 1;

  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < set.size(); ++i) {
    by_class[static_cast<std::size_t>(set.labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (by_class[c].size() < 3) {
      throw std::invalid_argument(
          "split: class " + std::to_string(c) + " has " +
          std::to_string(by_class[c].size()) +
          " epochs, need at least one per partition");
    }
  }

  SeededRng rng(seed);
  std::vector<std::size_t> train_rows, val_rows, test_rows;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::vector<std::size_t>& rows = by_class[c];
    rng.shuffle(rows);
    const auto counts = detail::apportion(rows.size(), ratios);
    std::size_t at = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) train_rows.push_back(rows[at++]);
    for (std::size_t i = 0; i < counts[1]; ++i) val_rows.push_back(rows[at++]);
    for (std::size_t i = 0; i < counts[2]; ++i) test_rows.push_back(rows[at++]);
  }
  // ascending original order inside each partition
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  Split split;
  split.train = detail::take_rows(set, train_rows);
  split.val = detail::take_rows(set, val_rows);
  split.test = detail::take_rows(set, test_rows);
  return split;
}

}  // namespace rawbci
