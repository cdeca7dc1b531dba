#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <random>

#include "affect/dataset.hpp"
#include "affect/featureize.hpp"
#include "affect/harness/metrics.hpp"
#include "affect/synth.hpp"

using namespace affect;

namespace {

const signal::SubjectRecording& recording(double seconds_per_condition) {
  static std::map<double, signal::SubjectRecording> cache;
  auto it = cache.find(seconds_per_condition);
  if (it == cache.end()) {
    synth::SynthSpec spec;
    spec.n_subjects = 1;
    spec.duration_s = seconds_per_condition;
    spec.missing_rate = 0.01;
    it = cache.emplace(seconds_per_condition, synth::generate_recordings(spec).front()).first;
  }
  return it->second;
}

}  // namespace

static void BM_ExtractFrames(benchmark::State& state) {
  const auto& rec = recording(double(state.range(0)));
  std::size_t frames = 0;
  for (auto _ : state) {
    auto f = features::extract_frames(rec, features::WindowSpec{});
    frames = f.size();
    benchmark::DoNotOptimize(f.data());
  }
  state.counters["frames"] = double(frames);
  state.SetItemsProcessed(std::int64_t(state.iterations() * frames));
}
BENCHMARK(BM_ExtractFrames)->Arg(120)->Arg(600)->Unit(benchmark::kMillisecond);

static void BM_PrepareSubject(benchmark::State& state) {
  const auto& rec = recording(300);
  for (auto _ : state) benchmark::DoNotOptimize(data::prepare_subject(rec).samples.size());
}
BENCHMARK(BM_PrepareSubject)->Unit(benchmark::kMillisecond);

static void BM_Auc(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = std::round(u(rng) * 100.0) / 100.0;  // plenty of ties
    labels[i] = int(rng() & 1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::auc(scores, labels));
  state.SetComplexityN(std::int64_t(n));
}
BENCHMARK(BM_Auc)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity(benchmark::oNLogN);
