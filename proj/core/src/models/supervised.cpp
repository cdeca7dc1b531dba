#include "affect/models/supervised.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "affect/error.hpp"
#include "affect/nn/adam.hpp"

namespace affect::models {

void TrainConfig::validate() const {
  if (batch_size == 0 || !(lr > 0.0) || latent_dim == 0 || generator_hidden == 0 ||
      !(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw Error(Errc::InvalidArgument,
                fmt::format("invalid training config (batch {}, lr {}, fraction {})", batch_size,
                            lr, labeled_fraction));
  }
}

SupervisedNet::SupervisedNet(const NetShape& shape)
    : backbone(shape), head("head", shape.representation_size(), 1) {}

void SupervisedNet::init(nn::Rng& rng) {
  backbone.init(rng);
  head.init(rng);
}

double SupervisedNet::forward(std::span<const double> x, nn::Mode mode, nn::Rng& rng,
                              Record& rec) const {
  backbone.forward(x, mode, rng, rec.backbone);
  head.forward(rec.backbone.rep, std::span<double>(&rec.logit, 1));
  rec.prob = nn::sigmoid(rec.logit);
  rec.recorded = true;
  return rec.prob;
}

void SupervisedNet::backward(const Record& rec, double d_logit, std::span<double> d_x) {
  if (!rec.recorded) throw Error(Errc::NoForwardRecorded, "supervised backward without forward");
  std::vector<double> d_rep(shape().representation_size());
  head.backward(rec.backbone.rep, std::span<const double>(&d_logit, 1), d_rep);
  backbone.backward(rec.backbone, d_rep, d_x);
}

double SupervisedNet::predict(std::span<const double> x) const {
  nn::Rng unused;
  Record rec;
  return forward(x, nn::Mode::Eval, unused, rec);
}

std::vector<double> SupervisedNet::predict(std::span<const data::SequenceSample> samples) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(predict(s.inputs));
  return out;
}

nn::ParamList SupervisedNet::params() {
  nn::ParamList list;
  backbone.collect(list);
  head.collect(list);
  return list;
}

double supervised_loss_and_grad(SupervisedNet& net, std::span<const data::SequenceSample> batch,
                                nn::Mode mode, nn::Rng& rng) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "supervised batch is empty");
  const auto params = net.params();
  nn::zero_grads(params);
  double total = 0.0;
  SupervisedNet::Record rec;
  for (const auto& s : batch) {
    net.forward(s.inputs, mode, rng, rec);
    const auto lg = nn::bce_with_logit(rec.logit, s.label);
    total += lg.loss;
    net.backward(rec, lg.d_logit);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  nn::scale_grads(params, inv);
  return total * inv;
}

SupervisedTrace train_supervised(SupervisedNet& net, std::span<const data::SequenceSample> train,
                                 const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw Error(Errc::EmptyTrainSet, "no training samples");
  for (const auto& s : train) {
    if (s.inputs.size() != net.shape().input_size()) {
      throw Error(Errc::ShapeMismatch, "training sample does not match the network input shape");
    }
  }
  SupervisedTrace trace;
  nn::Rng rng(data::mix_seed(cfg.seed, 0x5u));
  const auto adam = cfg.adam();
  const auto params = net.params();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<data::SequenceSample> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      batch.clear();
      for (std::size_t k = b; k < e; ++k) batch.push_back(train[order[k]]);
      epoch_loss += supervised_loss_and_grad(net, batch, nn::Mode::Train, rng) *
                    static_cast<double>(batch.size());
      nn::adam_step(params, adam);
    }
    trace.epoch_loss.push_back(epoch_loss / static_cast<double>(train.size()));
  }
  return trace;
}

}  // namespace affect::models
