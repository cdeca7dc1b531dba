#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "affect/dataset.hpp"
#include "affect/error.hpp"
#include "affect/synth.hpp"
#include "cli/config.hpp"

namespace affect::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kConfigError = 2, kRuntimeError = 3 };

/// Maps a library error onto the process exit code.
int exit_code_for(Errc code) noexcept;

std::string version_string();

/// Loads every subject and checks the recording invariants.
int cmd_validate(const std::filesystem::path& dataset_root, std::ostream& out, std::ostream& err);

/// label_counts.csv, sample_counts.csv, missing_counts.csv and one
/// hist_<channel>.csv (50 equal-width bins) per channel.
int cmd_summarize(const std::filesystem::path& dataset_root,
                  const std::filesystem::path& output_dir, std::ostream& out, std::ostream& err);

struct Prepared {
  std::vector<data::SubjectSequences> subjects;
  std::filesystem::path cache_path;
  std::string hash;
  bool cache_hit = false;
};

/// Normalizes, windows and sequences every subject, or reuses the cache entry
/// keyed by the preparation settings and the dataset files' sizes and times.
Prepared prepare(const ExperimentConfig& cfg, std::ostream& log);

int cmd_prepare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// LOSO experiment. Completed cells are appended to cells_<model>.csv so an
/// interrupted run resumes where it stopped.
int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Finite-difference gradient suite; fails when any check exceeds 1e-4.
int cmd_grad_check(std::uint64_t seed, std::ostream& out, std::ostream& err);

int cmd_synth(const synth::SynthSpec& spec, const std::filesystem::path& output_root,
              std::ostream& out, std::ostream& err);

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr std::size_t kHistogramBins = 50;

}  // namespace affect::cli
