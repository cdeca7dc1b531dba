#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "affect/dataset.hpp"
#include "affect/featureize.hpp"
#include "affect/signal.hpp"

namespace affect::fixture {

/// Recording of `seconds` with every channel at its E4 rate, filled with
/// `value`, and the whole label track set to `label`.
inline signal::SubjectRecording constant_recording(double seconds, double value,
                                                   signal::Label label,
                                                   std::string id = "S2") {
  signal::SubjectRecording rec;
  rec.subject_id = std::move(id);
  rec.label_track.labels.assign(static_cast<std::size_t>(std::llround(seconds * 700.0)), label);
  for (auto ch : signal::kChannels) {
    auto& c = rec.channel(ch);
    c.id = ch;
    c.rate_hz = signal::e4_rate_hz(ch);
    c.samples.assign(static_cast<std::size_t>(std::llround(seconds * c.rate_hz)), value);
  }
  return rec;
}

/// Random recording whose label track cycles through the four conditions in
/// segments of `segment_s` seconds, with a fraction of NaN samples.
inline signal::SubjectRecording random_recording(double seconds, double segment_s,
                                                 std::uint64_t seed, double nan_rate = 0.01,
                                                 std::string id = "S2") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution nan(nan_rate);
  auto rec = constant_recording(seconds, 0.0, signal::Label::Baseline, std::move(id));
  const signal::Label cycle[] = {signal::Label::Baseline, signal::Label::Stress,
                                 signal::Label::Amusement, signal::Label::Meditation};
  const auto seg = static_cast<std::size_t>(segment_s * 700.0);
  for (std::size_t i = 0; i < rec.label_track.labels.size(); ++i) {
    rec.label_track.labels[i] = cycle[(i / seg) % 4];
  }
  double scale = 1.0;
  for (auto ch : signal::kChannels) {
    scale *= 3.0;
    for (double& v : rec.channel(ch).samples) v = nan(rng) ? std::nan("") : scale * normal(rng);
  }
  return rec;
}

inline features::FeatureFrame frame(std::int64_t index, signal::Label label,
                                    double coverage = 1.0, double fill = 0.0) {
  features::FeatureFrame f;
  f.window_index = index;
  f.raw_label = label;
  f.coverage = coverage;
  f.t_end_seconds = 60.0 + 0.25 * static_cast<double>(index);
  f.features.fill(fill + static_cast<double>(index));
  return f;
}

/// Synthetic per-subject sequence sets with class-dependent means.
inline std::vector<data::SubjectSequences> toy_subjects(std::size_t n_subjects,
                                                        std::size_t pos_per_subject,
                                                        std::size_t neg_per_subject,
                                                        std::uint64_t seed,
                                                        std::size_t steps = 10,
                                                        std::size_t features = 30,
                                                        double shift = 3.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<data::SubjectSequences> out;
  for (std::size_t s = 0; s < n_subjects; ++s) {
    data::SubjectSequences subj;
    subj.subject_id = "S" + std::to_string(s + 2);
    const std::size_t total = pos_per_subject + neg_per_subject;
    for (std::size_t k = 0; k < total; ++k) {
      data::SequenceSample smp;
      smp.steps = steps;
      smp.features = features;
      smp.label = k < pos_per_subject ? 1 : 0;
      smp.subject_id = subj.subject_id;
      smp.end_window = static_cast<std::int64_t>(k);
      smp.inputs.resize(steps * features);
      for (double& v : smp.inputs) v = normal(rng) + (smp.label ? shift : 0.0);
      subj.samples.push_back(std::move(smp));
    }
    out.push_back(std::move(subj));
  }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("affect_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace affect::fixture
