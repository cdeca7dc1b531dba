#pragma once

// Deterministic synthetic wrist recordings for desk-scale end-to-end runs.
// Each subject gets baseline, amusement, stress and meditation segments of
// equal length. Stress raises the EDA mean by `separation` noise standard
// deviations and doubles the BVP variance; nothing else carries signal.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "affect/signal.hpp"

namespace affect::synth {

struct SynthSpec {
  std::size_t n_subjects = 4;
  // Per condition. Short segments let per-segment noise means act as subject
  // fingerprints once features are z-scored. 200 s is enough to drown them out
  // and still keeps SGAN runs over 4 subjects to minutes.
  double duration_s = 200.0;
  double separation = 6.0;    // in units of the EDA noise sigma
  std::uint64_t noise_seed = 1;
  /// Fraction of samples replaced by NaN, exercising imputation.
  double missing_rate = 0.001;

  /// Throws InvalidArgument (separation < 0, too-short condition, ...).
  void validate() const;
};

/// Subject ids are S2, S3, ...
std::vector<signal::SubjectRecording> generate_recordings(const SynthSpec& spec);

/// Writes one neutral-format directory per subject under `root`.
void generate(const SynthSpec& spec, const std::filesystem::path& root);

}  // namespace affect::synth
