#pragma once

// Multi-rate wrist recordings and the plain-text per-subject directory format:
//
//   S<k>/acc_x.csv acc_y.csv acc_z.csv bvp.csv eda.csv temp.csv labels.csv
//
// Each channel file starts with `rate_hz=<r>` and holds one float per line
// (`nan` marks a missing sample). labels.csv starts with `rate_hz=700` and
// holds one integer id per line.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace affect::signal {

enum class ChannelId : std::uint8_t { AccX, AccY, AccZ, Bvp, Eda, Temp };

inline constexpr std::size_t kChannelCount = 6;
inline constexpr std::array<ChannelId, kChannelCount> kChannels = {
    ChannelId::AccX, ChannelId::AccY, ChannelId::AccZ,
    ChannelId::Bvp,  ChannelId::Eda,  ChannelId::Temp};

/// "ACC_X", "BVP", ...
std::string_view channel_name(ChannelId id) noexcept;
/// File stem in the on-disk format: "acc_x", "bvp", ...
std::string_view channel_file_stem(ChannelId id) noexcept;
/// Native Empatica E4 sampling rate of the channel.
double e4_rate_hz(ChannelId id) noexcept;

constexpr std::size_t index_of(ChannelId id) noexcept {
  return static_cast<std::size_t>(id);
}

enum class Label : std::uint8_t {
  Undefined = 0,
  Baseline = 1,
  Stress = 2,
  Amusement = 3,
  Meditation = 4,
  Other = 5,
};

inline constexpr std::size_t kLabelKinds = 6;
inline constexpr double kLabelRateHz = 700.0;

std::string_view label_name(Label label) noexcept;
/// Ids 0..4 map one-to-one, 5..7 collapse to Other; anything else throws ParseError.
Label label_from_id(long id);
constexpr int label_id(Label label) noexcept { return static_cast<int>(label); }

struct ChannelSeries {
  ChannelId id = ChannelId::AccX;
  double rate_hz = 0.0;
  std::vector<double> samples;

  double duration_seconds() const noexcept {
    return static_cast<double>(samples.size()) / rate_hz;
  }
};

struct LabelTrack {
  double rate_hz = kLabelRateHz;
  std::vector<Label> labels;
};

struct SubjectRecording {
  std::string subject_id;
  std::array<ChannelSeries, kChannelCount> channels;
  LabelTrack label_track;

  const ChannelSeries& channel(ChannelId id) const noexcept {
    return channels[index_of(id)];
  }
  ChannelSeries& channel(ChannelId id) noexcept { return channels[index_of(id)]; }
};

/// Throws affect::Error (RateMismatch, DurationMismatch, ParseError) if any
/// recording invariant is violated.
void validate(const SubjectRecording& rec);

SubjectRecording load_subject(const std::filesystem::path& dir);
void store_subject(const SubjectRecording& rec, const std::filesystem::path& dir);

/// Label count divided by the label rate.
double duration_seconds(const SubjectRecording& rec) noexcept;

/// Subdirectories of `root`, ordered so that S2 < S10.
std::vector<std::filesystem::path> list_subject_dirs(const std::filesystem::path& root);

}  // namespace affect::signal
