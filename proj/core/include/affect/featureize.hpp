#pragma once

// Rolling-window feature extraction. Windows are laid out on the 700 Hz
// label timeline and realized on each channel at its native rate.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "affect/signal.hpp"

namespace affect::features {

inline constexpr std::size_t kStatsPerChannel = 5;
inline constexpr std::size_t kFeatureCount = signal::kChannelCount * kStatsPerChannel;

struct WindowSpec {
  std::int64_t length_label_samples = 42000;
  std::int64_t step_label_samples = 175;
  double label_rate_hz = signal::kLabelRateHz;

  /// Throws InvalidArgument unless 0 < step <= length.
  void validate() const;
};

struct WindowBounds {
  std::int64_t start = 0;
  std::int64_t end = 0;

  friend bool operator==(const WindowBounds&, const WindowBounds&) = default;
};

struct WindowStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double range = 0.0;
  double std = 0.0;  // population (divisor N)
};

/// Features are ordered channel-major: [ACC_X, ACC_Y, ACC_Z, BVP, EDA, TEMP]
/// x [min, max, mean, range, std].
struct FeatureFrame {
  std::int64_t window_index = 0;
  double t_end_seconds = 0.0;
  std::array<double, kFeatureCount> features{};
  signal::Label raw_label = signal::Label::Undefined;
  double coverage = 0.0;
};

constexpr std::size_t feature_index(signal::ChannelId ch, std::size_t stat) noexcept {
  return signal::index_of(ch) * kStatsPerChannel + stat;
}

/// Mean of the channel's non-NaN samples whose timestamps fall on BASELINE
/// label samples. Throws NoBaselineData when there are none.
double baseline_mean(const signal::ChannelSeries& ch, const signal::LabelTrack& labels);

/// Subtracts each channel's baseline mean from every sample; NaNs stay NaN.
signal::SubjectRecording baseline_normalize(const signal::SubjectRecording& rec);

/// Number of windows that fit; 0 when the recording is shorter than one window.
std::size_t window_count(const WindowSpec& spec, std::int64_t total_label_samples);

/// Throws RecordingTooShort if total < length.
std::vector<WindowBounds> window_bounds(const WindowSpec& spec,
                                        std::int64_t total_label_samples);

/// Native-rate sample range covered by a label-index window:
/// [floor(start*rate/label_rate), floor(end*rate/label_rate)), clipped to the channel.
std::span<const double> channel_slice(const signal::ChannelSeries& ch,
                                      std::int64_t start_label_idx,
                                      std::int64_t end_label_idx,
                                      double label_rate_hz);

/// Replaces NaNs with the mean of the finite entries. Throws AllMissing.
std::vector<double> impute_window(std::span<const double> values);

/// Throws EmptyWindow on empty input.
WindowStats window_stats(std::span<const double> values);

/// One frame per window of a baseline-normalized recording.
std::vector<FeatureFrame> extract_frames(const signal::SubjectRecording& rec,
                                         const WindowSpec& spec);

/// CSV with header `t_end,label,coverage,f00..f29`.
void write_frames_csv(std::span<const FeatureFrame> frames,
                      const std::filesystem::path& path);
std::vector<FeatureFrame> read_frames_csv(const std::filesystem::path& path);

}  // namespace affect::features
