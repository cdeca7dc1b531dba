#include "affect/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::signal {

namespace fs = std::filesystem;

std::string_view channel_name(ChannelId id) noexcept {
  switch (id) {
    case ChannelId::AccX: return "ACC_X";
    case ChannelId::AccY: return "ACC_Y";
    case ChannelId::AccZ: return "ACC_Z";
    case ChannelId::Bvp: return "BVP";
    case ChannelId::Eda: return "EDA";
    case ChannelId::Temp: return "TEMP";
  }
  return "?";
}

std::string_view channel_file_stem(ChannelId id) noexcept {
  switch (id) {
    case ChannelId::AccX: return "acc_x";
    case ChannelId::AccY: return "acc_y";
    case ChannelId::AccZ: return "acc_z";
    case ChannelId::Bvp: return "bvp";
    case ChannelId::Eda: return "eda";
    case ChannelId::Temp: return "temp";
  }
  return "?";
}

double e4_rate_hz(ChannelId id) noexcept {
  switch (id) {
    case ChannelId::AccX:
    case ChannelId::AccY:
    case ChannelId::AccZ: return 32.0;
    case ChannelId::Bvp: return 64.0;
    case ChannelId::Eda:
    case ChannelId::Temp: return 4.0;
  }
  return 0.0;
}

std::string_view label_name(Label label) noexcept {
  switch (label) {
    case Label::Undefined: return "UNDEFINED";
    case Label::Baseline: return "BASELINE";
    case Label::Stress: return "STRESS";
    case Label::Amusement: return "AMUSEMENT";
    case Label::Meditation: return "MEDITATION";
    case Label::Other: return "OTHER";
  }
  return "?";
}

Label label_from_id(long id) {
  if (id >= 0 && id <= 4) return static_cast<Label>(id);
  if (id >= 5 && id <= 7) return Label::Other;
  throw Error(Errc::ParseError, fmt::format("label id {} outside 0..7", id));
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

/// Splits into lines, tolerating a trailing newline and CR before LF.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

double parse_rate_header(std::string_view line, const fs::path& path) {
  constexpr std::string_view kPrefix = "rate_hz=";
  if (line.substr(0, kPrefix.size()) != kPrefix) {
    throw Error(Errc::ParseError, path.string() + ": missing rate_hz header");
  }
  auto body = line.substr(kPrefix.size());
  double rate = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), rate);
  if (ec != std::errc{} || ptr != body.data() + body.size() || !(rate > 0.0) ||
      !std::isfinite(rate)) {
    throw Error(Errc::ParseError, path.string() + ": bad rate header '" +
                                      std::string(line) + "'");
  }
  return rate;
}

double parse_sample(std::string_view token, const fs::path& path, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || std::isinf(value)) {
    throw Error(Errc::ParseError, fmt::format("{}:{}: bad sample '{}'", path.string(),
                                              line_no, token));
  }
  return value;
}

ChannelSeries read_channel(const fs::path& path, ChannelId id) {
  const auto text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(Errc::ParseError, path.string() + ": empty file");
  ChannelSeries series;
  series.id = id;
  series.rate_hz = parse_rate_header(lines.front(), path);
  series.samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    series.samples.push_back(parse_sample(lines[i], path, i + 1));
  }
  return series;
}

LabelTrack read_labels(const fs::path& path) {
  const auto text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(Errc::ParseError, path.string() + ": empty file");
  LabelTrack track;
  track.rate_hz = parse_rate_header(lines.front(), path);
  track.labels.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto tok = lines[i];
    if (tok.empty() && i + 1 == lines.size()) break;
    long id = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw Error(Errc::ParseError,
                  fmt::format("{}:{}: bad label '{}'", path.string(), i + 1, tok));
    }
    track.labels.push_back(label_from_id(id));
  }
  return track;
}

void append_rate_header(std::string& out, double rate) {
  out += "rate_hz=";
  out += fmt::format("{}", rate);
  out += '\n';
}

}  // namespace

void validate(const SubjectRecording& rec) {
  if (rec.label_track.rate_hz != kLabelRateHz) {
    throw Error(Errc::RateMismatch,
                fmt::format("{}: label rate {} Hz, expected {}", rec.subject_id,
                            rec.label_track.rate_hz, kLabelRateHz));
  }
  if (rec.label_track.labels.empty()) {
    throw Error(Errc::ParseError, rec.subject_id + ": empty label track");
  }
  const double duration = duration_seconds(rec);
  for (auto id : kChannels) {
    const auto& ch = rec.channel(id);
    if (ch.id != id) {
      throw Error(Errc::ParseError, rec.subject_id + ": channel slot holds wrong id");
    }
    if (ch.rate_hz != e4_rate_hz(id)) {
      throw Error(Errc::RateMismatch,
                  fmt::format("{}: {} declares {} Hz, expected {}", rec.subject_id,
                              channel_name(id), ch.rate_hz, e4_rate_hz(id)));
    }
    if (ch.samples.empty()) {
      throw Error(Errc::ParseError,
                  fmt::format("{}: {} has no samples", rec.subject_id, channel_name(id)));
    }
    for (double v : ch.samples) {
      if (std::isinf(v)) {
        throw Error(Errc::ParseError, fmt::format("{}: {} contains an infinite sample",
                                                  rec.subject_id, channel_name(id)));
      }
    }
    const double expected = duration * ch.rate_hz;
    if (std::abs(static_cast<double>(ch.samples.size()) - expected) > 1.0) {
      throw Error(Errc::DurationMismatch,
                  fmt::format("{}: {} has {} samples, labels imply {:.3f}",
                              rec.subject_id, channel_name(id), ch.samples.size(),
                              expected));
    }
  }
}

SubjectRecording load_subject(const fs::path& dir) {
  SubjectRecording rec;
  rec.subject_id = dir.filename().string();
  if (rec.subject_id.empty()) rec.subject_id = dir.parent_path().filename().string();
  for (auto id : kChannels) {
    const auto path = dir / (std::string(channel_file_stem(id)) + ".csv");
    if (!fs::is_regular_file(path)) {
      throw Error(Errc::MissingChannel,
                  fmt::format("{}: missing {}", rec.subject_id, path.filename().string()));
    }
    rec.channel(id) = read_channel(path, id);
  }
  const auto labels_path = dir / "labels.csv";
  if (!fs::is_regular_file(labels_path)) {
    throw Error(Errc::MissingChannel, rec.subject_id + ": missing labels.csv");
  }
  rec.label_track = read_labels(labels_path);
  validate(rec);
  return rec;
}

void store_subject(const SubjectRecording& rec, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  }
  for (auto id : kChannels) {
    const auto& ch = rec.channel(id);
    std::string out;
    out.reserve(ch.samples.size() * 20 + 32);
    append_rate_header(out, ch.rate_hz);
    for (double v : ch.samples) {
      if (std::isnan(v)) {
        out += "nan\n";
      } else {
        fmt::format_to(std::back_inserter(out), "{}\n", v);
      }
    }
    write_file(dir / (std::string(channel_file_stem(id)) + ".csv"), out);
  }
  std::string out;
  out.reserve(rec.label_track.labels.size() * 2 + 32);
  append_rate_header(out, rec.label_track.rate_hz);
  for (auto label : rec.label_track.labels) {
    out += static_cast<char>('0' + label_id(label));
    out += '\n';
  }
  write_file(dir / "labels.csv", out);
}

double duration_seconds(const SubjectRecording& rec) noexcept {
  return static_cast<double>(rec.label_track.labels.size()) / rec.label_track.rate_hz;
}

std::vector<fs::path> list_subject_dirs(const fs::path& root) {
  std::vector<fs::path> dirs;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) return dirs;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  // Natural order: compare the non-digit prefix, then the numeric suffix.
  auto key = [](const fs::path& p) {
    const auto name = p.filename().string();
    auto it = std::find_if(name.begin(), name.end(),
                           [](char c) { return c >= '0' && c <= '9'; });
    std::string prefix(name.begin(), it);
    std::string digits(it, name.end());
    long number = -1;
    auto [ptr, errc] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
    if (errc != std::errc{} || ptr != digits.data() + digits.size()) number = -1;
    return std::tuple(prefix, number, name);
  };
  std::sort(dirs.begin(), dirs.end(),
            [&](const fs::path& a, const fs::path& b) { return key(a) < key(b); });
  return dirs;
}

}  // namespace affect::signal
