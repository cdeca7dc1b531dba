#include <benchmark/benchmark.h>

#include <random>

#include "affect/models/sgan.hpp"
#include "affect/models/supervised.hpp"

using namespace affect;

namespace {

std::vector<data::SequenceSample> batch_of(std::size_t n) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<data::SequenceSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = out[i];
    s.steps = 10;
    s.features = 30;
    s.inputs.resize(300);
    for (double& v : s.inputs) v = normal(rng);
    s.label = int(i & 1);
    s.subject_id = "S2";
  }
  return out;
}

}  // namespace

// One forward (eval mode) pass of the supervised stack.
static void BM_SupervisedPredict(benchmark::State& state) {
  models::SupervisedNet net;
  nn::Rng rng(1);
  net.init(rng);
  const auto batch = batch_of(64);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(batch).data());
  state.SetItemsProcessed(std::int64_t(state.iterations() * batch.size()));
}
BENCHMARK(BM_SupervisedPredict)->Unit(benchmark::kMicrosecond);

// Forward + BPTT over a batch, dropout on.
static void BM_SupervisedLossAndGrad(benchmark::State& state) {
  models::SupervisedNet net;
  nn::Rng rng(1);
  net.init(rng);
  const auto batch = batch_of(std::size_t(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(models::supervised_loss_and_grad(net, batch, nn::Mode::Train, rng));
  }
  state.SetItemsProcessed(std::int64_t(state.iterations() * batch.size()));
}
BENCHMARK(BM_SupervisedLossAndGrad)->Arg(1)->Arg(64)->Unit(benchmark::kMicrosecond);

// Full C / D-real / D-fake / G round including Adam updates.
static void BM_SganTrainStep(benchmark::State& state) {
  models::SganNet net;
  nn::Rng rng(1);
  net.init(rng);
  const auto labeled = batch_of(64);
  const auto unlabeled = batch_of(64);
  const auto cfg = models::TrainConfig::sgan_defaults();
  for (auto _ : state) {
    benchmark::DoNotOptimize(models::sgan_train_step(net, labeled, unlabeled, cfg, rng).g_loss);
  }
}
BENCHMARK(BM_SganTrainStep)->Unit(benchmark::kMillisecond);
