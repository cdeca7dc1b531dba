#include "affect/featureize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::features {

using signal::ChannelSeries;
using signal::Label;
using signal::LabelTrack;
using signal::SubjectRecording;

void WindowSpec::validate() const {
  if (length_label_samples <= 0 || step_label_samples <= 0 ||
      step_label_samples > length_label_samples || !(label_rate_hz > 0.0)) {
    throw Error(Errc::InvalidArgument,
                fmt::format("window spec length={} step={} rate={} violates 0 < step <= length",
                            length_label_samples, step_label_samples, label_rate_hz));
  }
}

namespace {

std::int64_t scale_index(std::int64_t label_idx, double rate_hz, double label_rate_hz) {
  return static_cast<std::int64_t>(
      std::floor(static_cast<double>(label_idx) * rate_hz / label_rate_hz));
}

}  // namespace

double baseline_mean(const ChannelSeries& ch, const LabelTrack& labels) {
  const auto n_labels = static_cast<std::int64_t>(labels.labels.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ch.samples.size(); ++i) {
    // Label sample active at this channel sample's timestamp.
    const auto li = scale_index(static_cast<std::int64_t>(i), labels.rate_hz, ch.rate_hz);
    if (li >= n_labels) break;
    if (labels.labels[static_cast<std::size_t>(li)] != Label::Baseline) continue;
    const double v = ch.samples[i];
    if (std::isnan(v)) continue;
    sum += v;
    ++count;
  }
  if (count == 0) {
    throw Error(Errc::NoBaselineData,
                fmt::format("no baseline samples for channel {}", signal::channel_name(ch.id)));
  }
  return sum / static_cast<double>(count);
}

SubjectRecording baseline_normalize(const SubjectRecording& rec) {
  SubjectRecording out = rec;
  for (auto& ch : out.channels) {
    const double mean = baseline_mean(ch, rec.label_track);
    for (double& v : ch.samples) v -= mean;  // NaN - mean stays NaN
  }
  return out;
}

std::size_t window_count(const WindowSpec& spec, std::int64_t total_label_samples) {
  spec.validate();
  if (total_label_samples < spec.length_label_samples) return 0;
  return static_cast<std::size_t>(
      (total_label_samples - spec.length_label_samples) / spec.step_label_samples + 1);
}

std::vector<WindowBounds> window_bounds(const WindowSpec& spec,
                                        std::int64_t total_label_samples) {
  const auto count = window_count(spec, total_label_samples);
  if (count == 0) {
    throw Error(Errc::RecordingTooShort,
                fmt::format("{} label samples, window needs {}", total_label_samples,
                            spec.length_label_samples));
  }
  std::vector<WindowBounds> bounds(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto start = static_cast<std::int64_t>(k) * spec.step_label_samples;
    bounds[k] = {start, start + spec.length_label_samples};
  }
  return bounds;
}

std::span<const double> channel_slice(const ChannelSeries& ch, std::int64_t start_label_idx,
                                      std::int64_t end_label_idx, double label_rate_hz) {
  const auto size = static_cast<std::int64_t>(ch.samples.size());
  auto lo = std::clamp<std::int64_t>(scale_index(start_label_idx, ch.rate_hz, label_rate_hz),
                                     0, size);
  auto hi = std::clamp<std::int64_t>(scale_index(end_label_idx, ch.rate_hz, label_rate_hz),
                                     lo, size);
  return std::span<const double>(ch.samples).subspan(static_cast<std::size_t>(lo),
                                                     static_cast<std::size_t>(hi - lo));
}

std::vector<double> impute_window(std::span<const double> values) {
  double sum = 0.0;
  std::size_t finite = 0;
  for (double v : values) {
    if (!std::isnan(v)) {
      sum += v;
      ++finite;
    }
  }
  if (finite == 0) throw Error(Errc::AllMissing, "window has no observed samples");
  const double mean = sum / static_cast<double>(finite);
  std::vector<double> out(values.begin(), values.end());
  if (finite != values.size()) {
    for (double& v : out) {
      if (std::isnan(v)) v = mean;
    }
  }
  return out;
}

WindowStats window_stats(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::EmptyWindow, "no samples in window");
  WindowStats s;
  s.min = values.front();
  s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  const auto n = static_cast<double>(values.size());
  // Rounding in the sum can push the mean a few ulps past the extrema.
  s.mean = std::clamp(sum / n, s.min, s.max);
  s.range = s.max - s.min;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    ss += d * d;
  }
  s.std = std::sqrt(ss / n);
  return s;
}

namespace {

/// Majority vote over the four condition labels; ties go to the lower id.
std::pair<Label, std::int64_t> majority(const std::array<std::int64_t, signal::kLabelKinds>& counts) {
  Label best = Label::Undefined;
  std::int64_t best_count = 0;
  for (auto label : {Label::Baseline, Label::Stress, Label::Amusement, Label::Meditation}) {
    const auto c = counts[static_cast<std::size_t>(label)];
    if (c > best_count) {
      best = label;
      best_count = c;
    }
  }
  return {best, best_count};
}

}  // namespace

std::vector<FeatureFrame> extract_frames(const SubjectRecording& rec, const WindowSpec& spec) {
  const auto& labels = rec.label_track.labels;
  const auto bounds = window_bounds(spec, static_cast<std::int64_t>(labels.size()));

  std::vector<FeatureFrame> frames;
  frames.reserve(bounds.size());

  std::array<std::int64_t, signal::kLabelKinds> counts{};
  std::int64_t counted_lo = 0;
  std::int64_t counted_hi = 0;

  for (std::size_t k = 0; k < bounds.size(); ++k) {
    const auto [start, end] = bounds[k];
    // Slide the label histogram from [counted_lo, counted_hi) to [start, end).
    for (; counted_lo < start && counted_lo < counted_hi; ++counted_lo) {
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(counted_lo)])];
    }
    counted_lo = std::max(counted_lo, start);
    counted_hi = std::max(counted_hi, counted_lo);
    for (; counted_hi < end; ++counted_hi) {
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(counted_hi)])];
    }

    FeatureFrame frame;
    frame.window_index = static_cast<std::int64_t>(k);
    frame.t_end_seconds = static_cast<double>(end) / spec.label_rate_hz;
    const auto [label, count] = majority(counts);
    frame.raw_label = label;
    frame.coverage = static_cast<double>(count) / static_cast<double>(end - start);

    for (auto id : signal::kChannels) {
      auto slice = channel_slice(rec.channel(id), start, end, spec.label_rate_hz);
      const bool has_nan =
          std::any_of(slice.begin(), slice.end(), [](double v) { return std::isnan(v); });
      WindowStats st;
      try {
        st = has_nan ? window_stats(impute_window(slice)) : window_stats(slice);
      } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{} window {} channel {}: {}", rec.subject_id, k,
                                          signal::channel_name(id), e.what()));
      }
      auto* f = &frame.features[feature_index(id, 0)];
      f[0] = st.min;
      f[1] = st.max;
      f[2] = st.mean;
      f[3] = st.range;
      f[4] = st.std;
    }
    frames.push_back(frame);
  }
  return frames;
}

void write_frames_csv(std::span<const FeatureFrame> frames, const std::filesystem::path& path) {
  std::string out = "t_end,label,coverage";
  for (std::size_t i = 0; i < kFeatureCount; ++i) out += fmt::format(",f{:02}", i);
  out += '\n';
  auto it = std::back_inserter(out);
  for (const auto& f : frames) {
    fmt::format_to(it, "{},{},{}", f.t_end_seconds, signal::label_id(f.raw_label), f.coverage);
    for (double v : f.features) fmt::format_to(it, ",{}", v);
    out += '\n';
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os << out;
  if (!os) throw Error(Errc::IoError, "short write to " + path.string());
}

std::vector<FeatureFrame> read_frames_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("t_end,label,coverage", 0) != 0) {
    throw Error(Errc::ParseError, path.string() + ": unexpected frame header");
  }
  std::vector<FeatureFrame> frames;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    FeatureFrame f;
    f.window_index = static_cast<std::int64_t>(frames.size());
    std::array<double, kFeatureCount + 3> fields{};
    std::size_t n = 0;
    const char* p = line.data();
    const char* e = line.data() + line.size();
    while (p <= e && n < fields.size()) {
      const char* comma = std::find(p, e, ',');
      auto [ptr, ec] = std::from_chars(p, comma, fields[n]);
      if (ec != std::errc{} || ptr != comma) break;
      ++n;
      p = comma + 1;
    }
    if (n != fields.size()) {
      throw Error(Errc::ParseError, fmt::format("{}:{}: malformed frame row", path.string(), line_no));
    }
    f.t_end_seconds = fields[0];
    f.raw_label = signal::label_from_id(static_cast<long>(fields[1]));
    f.coverage = fields[2];
    std::copy(fields.begin() + 3, fields.end(), f.features.begin());
    frames.push_back(f);
  }
  return frames;
}

}  // namespace affect::features
