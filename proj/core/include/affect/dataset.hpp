#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affect/featureize.hpp"
#include "affect/signal.hpp"

namespace affect::data {

/// STRESS -> 1, AMUSEMENT/MEDITATION -> 0, BASELINE -> nullopt (used only
/// for normalization). UNDEFINED/OTHER throw UnmappableLabel.
std::optional<int> map_binary_label(signal::Label raw);

struct SequenceSample {
  std::size_t steps = 0;
  std::size_t features = 0;
  std::vector<double> inputs;  // steps x features, oldest frame first
  int label = 0;
  std::string subject_id;
  bool labeled = true;
  std::int64_t end_window = 0;  // window index of the final frame

  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(inputs).subspan(t * features, features);
  }
};

struct SequenceOptions {
  std::size_t steps = 10;
  double min_coverage = 0.9;
};

/// Sliding groups of `steps` consecutive frames sharing one mapped label.
/// Low-coverage frames, unmappable/baseline frames and gaps in the window
/// index all break a run.
std::vector<SequenceSample> build_sequences(std::span<const features::FeatureFrame> frames,
                                            std::string_view subject_id,
                                            const SequenceOptions& opts = {});

/// Drops majority-class samples uniformly at random (without replacement)
/// until both classes have the same count. Keeps input order.
std::vector<SequenceSample> rebalance(std::span<const SequenceSample> samples,
                                      std::uint64_t seed);

/// Stratified: floor(fraction * class_count) samples per class keep
/// labeled = true, the rest are marked unlabeled. Order and labels unchanged.
std::vector<SequenceSample> split_labeled(std::span<const SequenceSample> samples,
                                          double labeled_fraction, std::uint64_t seed);

inline constexpr double kStdFloor = 1e-8;

/// Per-feature z-scoring statistics, pooled over every time step.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;

  static Standardizer fit(std::span<const SequenceSample> samples);
  void apply(SequenceSample& sample) const;
};

struct FoldDataset {
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> test;
  Standardizer standardizer;
  std::string test_subject;
};

/// Fits on fold.train only and transforms both splits.
FoldDataset standardize_fit_apply(FoldDataset fold);

struct SubjectSequences {
  std::string subject_id;
  std::vector<SequenceSample> samples;
};

struct FoldOptions {
  bool rebalance_train = true;
  bool standardize = true;
};

/// Baseline normalization, windowed features and sequence building for one
/// recording.
SubjectSequences prepare_subject(const signal::SubjectRecording& rec,
                                 const features::WindowSpec& window = {},
                                 const SequenceOptions& opts = {});

/// Fold holding out subjects[test_index].
FoldDataset build_fold(std::span<const SubjectSequences> subjects, std::size_t test_index,
                       std::uint64_t seed, const FoldOptions& opts = {});

/// One fold per subject, fold k seeded from (seed, k).
std::vector<FoldDataset> make_loso_folds(std::span<const SubjectSequences> subjects,
                                         std::uint64_t seed, const FoldOptions& opts = {});

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// CSV dump: subject,label,labeled,end_window,x0..x{steps*features-1}.
void write_sequences_csv(std::span<const SequenceSample> samples,
                         const std::filesystem::path& path);

/// Inverse of write_sequences_csv; each row is split into `steps` frames.
std::vector<SequenceSample> read_sequences_csv(const std::filesystem::path& path,
                                               std::size_t steps);

}  // namespace affect::data
