#include "affect/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::data {

using features::FeatureFrame;
using signal::Label;

std::optional<int> map_binary_label(Label raw) {
  switch (raw) {
    case Label::Stress: return 1;
    case Label::Amusement:
    case Label::Meditation: return 0;
    case Label::Baseline: return std::nullopt;
    case Label::Undefined:
    case Label::Other: break;
  }
  throw Error(Errc::UnmappableLabel,
              fmt::format("label {} has no binary class", signal::label_name(raw)));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  // splitmix64 finalizer over a salted state
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<SequenceSample> build_sequences(std::span<const FeatureFrame> frames,
                                            std::string_view subject_id,
                                            const SequenceOptions& opts) {
  std::vector<SequenceSample> out;
  if (opts.steps == 0) throw Error(Errc::InvalidArgument, "sequence length must be positive");

  std::size_t run_len = 0;
  int run_label = -1;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    std::optional<int> mapped;
    if (f.coverage >= opts.min_coverage && f.raw_label != Label::Undefined &&
        f.raw_label != Label::Other) {
      mapped = map_binary_label(f.raw_label);
    }
    const bool contiguous = run_len > 0 && frames[i - 1].window_index + 1 == f.window_index;
    if (!mapped) {
      run_len = 0;
      continue;
    }
    if (run_len == 0 || !contiguous || *mapped != run_label) {
      run_len = 0;
      run_label = *mapped;
    }
    ++run_len;
    if (run_len < opts.steps) continue;

    SequenceSample s;
    s.steps = opts.steps;
    s.features = features::kFeatureCount;
    s.inputs.reserve(opts.steps * features::kFeatureCount);
    const std::size_t first = i + 1 - opts.steps;
    for (std::size_t j = first; j <= i; ++j) {
      s.inputs.insert(s.inputs.end(), frames[j].features.begin(), frames[j].features.end());
    }
    s.label = run_label;
    s.subject_id = std::string(subject_id);
    s.end_window = f.window_index;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SequenceSample> rebalance(std::span<const SequenceSample> samples,
                                      std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].label == 1 ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw Error(Errc::DegenerateClassDistribution,
                fmt::format("{} positives, {} negatives", pos.size(), neg.size()));
  }
  auto& majority = neg.size() >= pos.size() ? neg : pos;
  const auto& minority = neg.size() >= pos.size() ? pos : neg;

  std::mt19937_64 rng(seed);
  std::shuffle(majority.begin(), majority.end(), rng);
  majority.resize(minority.size());

  std::vector<std::size_t> keep;
  keep.reserve(2 * minority.size());
  keep.insert(keep.end(), pos.begin(), pos.end());
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());

  std::vector<SequenceSample> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(samples[i]);
  return out;
}

std::vector<SequenceSample> split_labeled(std::span<const SequenceSample> samples,
                                          double labeled_fraction, std::uint64_t seed) {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw Error(Errc::InvalidArgument,
                fmt::format("labeled fraction {} outside (0, 1]", labeled_fraction));
  }
  std::vector<SequenceSample> out(samples.begin(), samples.end());
  std::mt19937_64 rng(seed);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].label == cls) idx.push_back(i);
    }
    // The epsilon keeps e.g. 0.29 * 100 from flooring to 28.
    const auto keep = static_cast<std::size_t>(
        std::floor(labeled_fraction * static_cast<double>(idx.size()) + 1e-9));
    if (keep == 0) {
      throw Error(Errc::EmptyLabeledSet,
                  fmt::format("fraction {} of {} class-{} samples leaves none labeled",
                              labeled_fraction, idx.size(), cls));
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]].labeled = k < keep;
  }
  return out;
}

Standardizer Standardizer::fit(std::span<const SequenceSample> samples) {
  if (samples.empty()) throw Error(Errc::EmptyTrainSet, "cannot fit standardizer on no samples");
  const auto nf = samples.front().features;
  Standardizer s;
  s.mean.assign(nf, 0.0);
  s.std.assign(nf, 0.0);
  std::size_t rows = 0;
  for (const auto& sample : samples) {
    if (sample.features != nf) throw Error(Errc::ShapeMismatch, "mixed feature widths");
    for (std::size_t t = 0; t < sample.steps; ++t) {
      auto r = sample.row(t);
      for (std::size_t j = 0; j < nf; ++j) s.mean[j] += r[j];
      ++rows;
    }
  }
  for (auto& m : s.mean) m /= static_cast<double>(rows);
  for (const auto& sample : samples) {
    for (std::size_t t = 0; t < sample.steps; ++t) {
      auto r = sample.row(t);
      for (std::size_t j = 0; j < nf; ++j) {
        const double d = r[j] - s.mean[j];
        s.std[j] += d * d;
      }
    }
  }
  for (auto& v : s.std) v = std::max(std::sqrt(v / static_cast<double>(rows)), kStdFloor);
  return s;
}

void Standardizer::apply(SequenceSample& sample) const {
  if (sample.features != mean.size()) throw Error(Errc::ShapeMismatch, "standardizer width");
  for (std::size_t t = 0; t < sample.steps; ++t) {
    double* r = sample.inputs.data() + t * sample.features;
    for (std::size_t j = 0; j < sample.features; ++j) r[j] = (r[j] - mean[j]) / std[j];
  }
}

FoldDataset standardize_fit_apply(FoldDataset fold) {
  fold.standardizer = Standardizer::fit(fold.train);
  for (auto& s : fold.train) fold.standardizer.apply(s);
  for (auto& s : fold.test) fold.standardizer.apply(s);
  return fold;
}

SubjectSequences prepare_subject(const signal::SubjectRecording& rec,
                                 const features::WindowSpec& window,
                                 const SequenceOptions& opts) {
  const auto frames = features::extract_frames(features::baseline_normalize(rec), window);
  return {rec.subject_id, build_sequences(frames, rec.subject_id, opts)};
}

FoldDataset build_fold(std::span<const SubjectSequences> subjects, std::size_t test_index,
                       std::uint64_t seed, const FoldOptions& opts) {
  if (test_index >= subjects.size()) {
    throw Error(Errc::InvalidArgument, "fold index out of range");
  }
  FoldDataset fold;
  fold.test_subject = subjects[test_index].subject_id;
  std::vector<SequenceSample> pooled;
  for (std::size_t k = 0; k < subjects.size(); ++k) {
    if (k == test_index) continue;
    if (subjects[k].subject_id == fold.test_subject) {
      throw Error(Errc::InvalidArgument, "duplicate subject id " + fold.test_subject);
    }
    pooled.insert(pooled.end(), subjects[k].samples.begin(), subjects[k].samples.end());
  }
  fold.train = opts.rebalance_train ? rebalance(pooled, mix_seed(seed, 1)) : std::move(pooled);
  fold.test = subjects[test_index].samples;
  if (opts.standardize) return standardize_fit_apply(std::move(fold));
  return fold;
}

std::vector<FoldDataset> make_loso_folds(std::span<const SubjectSequences> subjects,
                                         std::uint64_t seed, const FoldOptions& opts) {
  std::vector<FoldDataset> folds;
  folds.reserve(subjects.size());
  for (std::size_t k = 0; k < subjects.size(); ++k) {
    folds.push_back(build_fold(subjects, k, mix_seed(seed, k), opts));
  }
  return folds;
}

void write_sequences_csv(std::span<const SequenceSample> samples,
                         const std::filesystem::path& path) {
  std::string out = "subject,label,labeled,end_window";
  const std::size_t width = samples.empty() ? 0 : samples.front().inputs.size();
  for (std::size_t i = 0; i < width; ++i) out += fmt::format(",x{}", i);
  out += '\n';
  auto it = std::back_inserter(out);
  for (const auto& s : samples) {
    fmt::format_to(it, "{},{},{},{}", s.subject_id, s.label, s.labeled ? 1 : 0, s.end_window);
    for (double v : s.inputs) fmt::format_to(it, ",{}", v);
    out += '\n';
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os << out;
}

std::vector<SequenceSample> read_sequences_csv(const std::filesystem::path& path,
                                               std::size_t steps) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("subject,label,labeled,end_window", 0) != 0) {
    throw Error(Errc::ParseError, path.string() + ": unexpected sequence header");
  }
  const auto width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 3;
  if (steps == 0 || width % steps != 0) {
    throw Error(Errc::ParseError,
                fmt::format("{}: {} values do not split into {} steps", path.string(), width, steps));
  }
  std::vector<SequenceSample> out;
  std::size_t line_no = 1;
  auto bad = [&] {
    return Error(Errc::ParseError, fmt::format("{}:{}: malformed sequence row", path.string(), line_no));
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    SequenceSample s;
    s.steps = steps;
    s.features = width / steps;
    std::stringstream ss(line);
    std::string tok, labeled;
    if (!std::getline(ss, s.subject_id, ',') || !std::getline(ss, tok, ',')) throw bad();
    s.label = tok == "1" ? 1 : 0;
    if (!std::getline(ss, labeled, ',') || !std::getline(ss, tok, ',')) throw bad();
    s.labeled = labeled == "1";
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), s.end_window);
    if (ec != std::errc{}) throw bad();
    s.inputs.reserve(width);
    while (std::getline(ss, tok, ',')) {
      double v = 0.0;
      auto [q, ec2] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec2 != std::errc{} || q != tok.data() + tok.size()) throw bad();
      s.inputs.push_back(v);
    }
    if (s.inputs.size() != width) throw bad();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace affect::data
