#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawbci/dataset_io.hpp"
#include "rawbci/recording.hpp"
#include "rawbci/rng.hpp"

namespace rawbci {

struct ModalitySettings {
  Modality modality = Modality::FNIRS;
  bool enabled = false;
  double sampling_rate_hz = 0.0;
  std::size_t n_channels = 0;
};

/// Emulated multimodal sessions with class-dependent waveforms. Realism is
/// deliberately minimal: the templates exist to be separable and
/// controllable at desk scale, not physiologically faithful.
struct SynthConfig {
  std::size_t n_subjects = 10;
  LabelMap label_map = LabelMap::default_activities();
  std::array<ModalitySettings, 3> modalities = {
      ModalitySettings{Modality::FNIRS, true, 7.8125, 40},
      ModalitySettings{Modality::EEG, false, 250.0, 8},
      ModalitySettings{Modality::MOCAP, false, 100.0, 6}};
  SessionSchedule schedule;  // class_labels filled by validate() if empty
  double signal_amplitude = 1.0;
  // signal-amplitude to noise-std ratio; noise std = signal_amplitude / snr.
  // 5.0 keeps the default pipeline comfortably above the 0.90 test-accuracy
  // bar while the classes still overlap under noise.
  double snr = 5.0;
  std::uint64_t seed = 1;

  void validate() {
    if (n_subjects == 0) {
      throw std::invalid_argument("synth config: n_subjects must be >= 1");
    }
    if (snr <= 0.0) {
      throw std::invalid_argument("synth config: snr must be > 0");
    }
    if (signal_amplitude <= 0.0) {
      throw std::invalid_argument(
          "synth config: signal_amplitude must be > 0");
    }
    bool any = false;
    for (const ModalitySettings& m : modalities) {
      if (!m.enabled) continue;
      any = true;
      if (m.sampling_rate_hz <= 0.0) {
        throw std::invalid_argument("synth config: " +
                                    modality_name(m.modality) +
                                    " sampling_rate_hz must be > 0");
      }
      if (m.n_channels == 0) {
        throw std::invalid_argument("synth config: " +
                                    modality_name(m.modality) +
                                    " n_channels must be >= 1");
      }
    }
    if (!any) {
      throw std::invalid_argument(
          "synth config: at least one modality must be enabled");
    }
    if (schedule.class_labels.empty()) {
      for (std::size_t c = 0; c < label_map.size(); ++c) {
        schedule.class_labels.push_back(static_cast<int>(c));
      }
    }
    schedule.validate(label_map.size());
  }
};

/// Noise-free template value for class `class_id` on `channel` at time
/// `t_rel` seconds into the activity block. Zero during rest.
///
/// fNIRS: a saturating rise over the block, positive on the first
/// (oxygenation-like) half of the channels and negative on the second half,
/// on the channel subset selected by the class. EEG: a class-indexed
/// sinusoid with a channel-dependent amplitude falloff. MoCap: a smooth
/// bell-shaped displacement on the class-indexed channel subset.
inline double class_template(const ModalitySettings& settings,
                             std::size_t n_classes, double amplitude,
                             int class_id, std::size_t channel,
                             double t_rel, double activity_seconds) {
  switch (settings.modality) {
    case Modality::FNIRS: {
      if (channel % n_classes != static_cast<std::size_t>(class_id)) {
        return 0.0;
      }
      const double rise = 1.0 - std::exp(-t_rel / 2.0);
      const double sign =
          channel < settings.n_channels / 2 ? 1.0 : -1.0;
      return amplitude * rise * sign;
    }
    case Modality::EEG: {
      const double freq = 6.0 + 4.0 * static_cast<double>(class_id);
      const double channel_gain =
          1.0 / (1.0 + static_cast<double>(channel));
      return amplitude * channel_gain *
             std::sin(2.0 * 3.14159265358979323846 * freq * t_rel);
    }
    case Modality::MOCAP: {
      if (channel % n_classes != static_cast<std::size_t>(class_id)) {
        return 0.0;
      }
      const double mid = 0.5 * activity_seconds;
      const double width = activity_seconds / 8.0;
      const double z = (t_rel - mid) / width;
      return amplitude * std::exp(-0.5 * z * z);
    }
  }
  throw std::invalid_argument("class_template: bad modality");
}

namespace detail {

inline std::string two_digit(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02zu", n);
  return buf;
}

inline std::vector<std::string> synth_channel_names(
    const ModalitySettings& settings) {
  std::vector<std::string> names;
  names.reserve(settings.n_channels);
  if (settings.modality == Modality::FNIRS) {
    // two wavelength halves: ch01_wl1.. then ch01_wl2..
    const std::size_t half = settings.n_channels / 2;
    for (std::size_t c = 0; c < settings.n_channels; ++c) {
      const bool first_half = c < half || half == 0;
      const std::size_t idx = first_half ? c + 1 : c - half + 1;
      names.push_back("ch" + two_digit(idx) + "_wl" + (first_half ? "1" : "2"));
    }
  } else {
    const std::string prefix = modality_name(settings.modality);
    for (std::size_t c = 0; c < settings.n_channels; ++c) {
      names.push_back(prefix + two_digit(c + 1));
    }
  }
  return names;
}

}  // namespace detail

inline std::string synth_subject_id(std::size_t subject_index) {
  return "S" + detail::two_digit(subject_index + 1);
}

/// Deterministic session for one subject: one Recording per enabled
/// modality. The stream seed is derive_seed(config.seed, subject_index,
/// modality rank), so any subset regenerates identically. Noise draws are
/// consumed in sample-major order over the full recording, activity and
/// rest alike.
inline std::vector<Recording> generate_session(SynthConfig config,
                                               std::size_t subject_index) {
  config.validate();
  if (subject_index >= config.n_subjects) {
    throw std::invalid_argument("generate_session: subject index " +
                                std::to_string(subject_index) +
                                " outside 0.." +
                                std::to_string(config.n_subjects - 1));
  }
  const SessionSchedule& sched = config.schedule;
  const std::size_t n_classes = config.label_map.size();
  std::vector<Recording> session;
  for (const ModalitySettings& settings : config.modalities) {
    if (!settings.enabled) continue;
    SeededRng rng(derive_seed(config.seed, subject_index,
                              static_cast<std::uint64_t>(settings.modality)));
    const double fs = settings.sampling_rate_hz;
    const std::size_t n_samples =
        static_cast<std::size_t>(sched.total_seconds() * fs);
    const double noise_std = config.signal_amplitude / config.snr;

    Recording rec;
    rec.modality = settings.modality;
    rec.sampling_rate_hz = fs;
    rec.channel_names = detail::synth_channel_names(settings);
    rec.subject_id = synth_subject_id(subject_index);
    rec.schedule = sched;
    rec.label_map = config.label_map;
    rec.samples = Matrix(n_samples, settings.n_channels);
    for (std::size_t s = 0; s < n_samples; ++s) {
      const double t = static_cast<double>(s) / fs;
      int class_id = -1;
      double t_rel = 0.0;
      if (t >= sched.initial_offset_seconds) {
        const double since = t - sched.initial_offset_seconds;
        const std::size_t b =
            static_cast<std::size_t>(since / sched.block_seconds());
        const double in_block = since - static_cast<double>(b) *
                                            sched.block_seconds();
        if (b < sched.total_blocks() && in_block < sched.activity_seconds) {
          class_id = sched.block_class(b);
          t_rel = in_block;
        }
      }
      for (std::size_t c = 0; c < settings.n_channels; ++c) {
        double v = noise_std * rng.normal();
        if (class_id >= 0) {
          v += class_template(settings, n_classes, config.signal_amplitude,
                              class_id, c, t_rel, sched.activity_seconds);
        }
        rec.samples(s, c) = v;
      }
    }
    session.push_back(std::move(rec));
  }
  return session;
}

struct DatasetFile {
  std::string subject_id;
  Modality modality = Modality::FNIRS;
  std::string data;  // relative to the manifest directory
  std::string meta;
};

struct DatasetManifest {
  std::string path;  // where the manifest itself was written
  std::vector<DatasetFile> files;
};

inline json synth_config_to_json(const SynthConfig& config) {
  json modalities = json::object();
  for (const ModalitySettings& m : config.modalities) {
    modalities[modality_name(m.modality)] = {
        {"enabled", m.enabled},
        {"sampling_rate_hz", m.sampling_rate_hz},
        {"n_channels", m.n_channels}};
  }
  return json{{"n_subjects", config.n_subjects},
              {"label_map", config.label_map.names()},
              {"modalities", modalities},
              {"schedule", schedule_to_json(config.schedule)},
              {"signal_amplitude", config.signal_amplitude},
              {"snr", config.snr},
              {"seed", config.seed}};
}

/// Writes every subject/modality recording in the CSV + sidecar session
/// format plus a manifest JSON (file list, config echo, seed). File paths
/// inside the manifest are relative, so identical config + seed produce
/// byte-identical trees anywhere.
inline DatasetManifest write_dataset(SynthConfig config,
                                     const std::string& out_dir) {
  config.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("write_dataset: cannot create directory " +
                             out_dir + ": " + ec.message());
  }
  DatasetManifest manifest;
  json file_list = json::array();
  for (std::size_t subject = 0; subject < config.n_subjects; ++subject) {
    const std::vector<Recording> session = generate_session(config, subject);
    for (const Recording& rec : session) {
      DatasetFile entry;
      entry.subject_id = rec.subject_id;
      entry.modality = rec.modality;
      const std::string stem = rec.subject_id + "_" +
                               modality_name(rec.modality);
      entry.data = stem + ".csv";
      entry.meta = stem + ".meta.json";
      write_recording(rec, (fs::path(out_dir) / entry.data).string(),
                      (fs::path(out_dir) / entry.meta).string());
      file_list.push_back(json{{"subject_id", entry.subject_id},
                               {"modality", modality_name(entry.modality)},
                               {"data", entry.data},
                               {"meta", entry.meta}});
      manifest.files.push_back(std::move(entry));
    }
  }
  const json manifest_json{{"format_version", 1},
                           {"config", synth_config_to_json(config)},
                           {"files", file_list}};
  manifest.path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream out(manifest.path);
  if (!out) {
    throw std::runtime_error("write_dataset: cannot open " + manifest.path);
  }
  out << manifest_json.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write_dataset: write failed: " + manifest.path);
  }
  return manifest;
}

/// Reads back a manifest written by write_dataset; paths are resolved
/// relative to the manifest's directory.
inline DatasetManifest read_manifest(const std::string& manifest_path) {
  const json j = parse_json_file(manifest_path);
  check_keys(j, {"format_version", "config", "files"}, manifest_path);
  const int version = require_key(j, "format_version", manifest_path)
                          .get<int>();
  if (version != 1) {
    throw std::runtime_error(manifest_path + ": unsupported format_version " +
                             std::to_string(version));
  }
  DatasetManifest manifest;
  manifest.path = manifest_path;
  for (const json& f : require_key(j, "files", manifest_path)) {
    check_keys(f, {"subject_id", "modality", "data", "meta"},
               manifest_path + ": files entry");
    DatasetFile entry;
    entry.subject_id = require_key(f, "subject_id", manifest_path)
                           .get<std::string>();
    entry.modality = modality_from_name(
        require_key(f, "modality", manifest_path).get<std::string>());
    entry.data = require_key(f, "data", manifest_path).get<std::string>();
    entry.meta = require_key(f, "meta", manifest_path).get<std::string>();
    manifest.files.push_back(std::move(entry));
  }
  return manifest;
}

}  // namespace rawbci
