#include "affect/synth.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "affect/dataset.hpp"
#include "affect/error.hpp"

namespace affect::synth {

using signal::ChannelId;
using signal::Label;

namespace {

struct ChannelModel {
  double noise_sigma;
  double offset_spread;
  double offset_center;
};

ChannelModel model_of(ChannelId id) {
  switch (id) {
    case ChannelId::AccX:
    case ChannelId::AccY:
    case ChannelId::AccZ: return {0.05, 0.3, 0.0};
    case ChannelId::Bvp: return {30.0, 5.0, 0.0};
    case ChannelId::Eda: return {0.1, 1.0, 3.0};
    case ChannelId::Temp: return {0.05, 1.0, 32.0};
  }
  return {1.0, 0.0, 0.0};
}

constexpr Label kConditions[] = {Label::Baseline, Label::Amusement, Label::Stress,
                                 Label::Meditation};

}  // namespace

void SynthSpec::validate() const {
  const double quarter = duration_s * 4.0;
  if (n_subjects == 0 || !(separation >= 0.0) || !std::isfinite(separation) ||
      !(duration_s >= 60.0) || quarter != std::floor(quarter) || !(missing_rate >= 0.0) ||
      !(missing_rate < 0.5)) {
    throw Error(Errc::InvalidArgument,
                fmt::format("synthetic spec needs subjects >= 1, separation >= 0, a per-condition "
                            "duration >= 60 s in 0.25 s steps and missing rate in [0, 0.5); got "
                            "{} subjects, separation {}, duration {}, missing {}",
                            n_subjects, separation, duration_s, missing_rate));
  }
}

std::vector<signal::SubjectRecording> generate_recordings(const SynthSpec& spec) {
  spec.validate();
  std::vector<signal::SubjectRecording> out;
  out.reserve(spec.n_subjects);
  const auto labels_per_condition =
      static_cast<std::size_t>(std::llround(spec.duration_s * signal::kLabelRateHz));

  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    std::mt19937_64 rng(data::mix_seed(spec.noise_seed, s));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution missing(spec.missing_rate);

    signal::SubjectRecording rec;
    rec.subject_id = fmt::format("S{}", s + 2);
    rec.label_track.rate_hz = signal::kLabelRateHz;
    for (auto cond : kConditions) {
      rec.label_track.labels.insert(rec.label_track.labels.end(), labels_per_condition, cond);
    }

    for (auto id : signal::kChannels) {
      const auto m = model_of(id);
      auto& ch = rec.channel(id);
      ch.id = id;
      ch.rate_hz = signal::e4_rate_hz(id);
      const double offset = m.offset_center + m.offset_spread * normal(rng);
      const auto per_condition =
          static_cast<std::size_t>(std::llround(spec.duration_s * ch.rate_hz));
      ch.samples.reserve(per_condition * std::size(kConditions));
      for (auto cond : kConditions) {
        double mean = offset;
        double sigma = m.noise_sigma;
        if (cond == Label::Stress && spec.separation > 0.0) {
          if (id == ChannelId::Eda) mean += spec.separation * m.noise_sigma;
          if (id == ChannelId::Bvp) sigma *= std::sqrt(2.0);
        }
        for (std::size_t i = 0; i < per_condition; ++i) {
          const double v = mean + sigma * normal(rng);
          ch.samples.push_back(missing(rng) ? std::nan("") : v);
        }
      }
    }
    signal::validate(rec);
    out.push_back(std::move(rec));
  }
  return out;
}

void generate(const SynthSpec& spec, const std::filesystem::path& root) {
  for (const auto& rec : generate_recordings(spec)) {
    signal::store_subject(rec, root / rec.subject_id);
  }
}

}  // namespace affect::synth
