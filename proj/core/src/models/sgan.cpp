#include "affect/models/sgan.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "affect/error.hpp"
#include "affect/nn/adam.hpp"

namespace affect::models {

Generator::Generator(const NetShape& shape, std::size_t latent_dim, std::size_t hidden)
    : hidden_layer("gen.hidden", latent_dim, hidden),
      output_layer("gen.out", hidden, shape.input_size()) {}

void Generator::init(nn::Rng& rng) {
  hidden_layer.init(rng);
  output_layer.init(rng);
}

void Generator::forward(std::span<const double> z, Trace& trace) const {
  trace.z.assign(z.begin(), z.end());
  trace.pre.resize(hidden_layer.out());
  trace.hidden.resize(hidden_layer.out());
  trace.out.resize(output_layer.out());
  hidden_layer.forward(z, trace.pre);
  for (std::size_t i = 0; i < trace.pre.size(); ++i) {
    trace.hidden[i] = trace.pre[i] > 0.0 ? trace.pre[i] : 0.0;
  }
  output_layer.forward(trace.hidden, trace.out);
}

void Generator::backward(const Trace& trace, std::span<const double> d_out) {
  std::vector<double> d_hidden(hidden_layer.out());
  output_layer.backward(trace.hidden, d_out, d_hidden);
  for (std::size_t i = 0; i < d_hidden.size(); ++i) {
    if (!(trace.pre[i] > 0.0)) d_hidden[i] = 0.0;
  }
  hidden_layer.backward(trace.z, d_hidden, {});
}

void Generator::collect(nn::ParamList& out) {
  hidden_layer.collect(out);
  output_layer.collect(out);
}

nn::Tensor generate_fake(const Generator& gen, const NetShape& shape, std::size_t batch,
                         nn::Rng& rng) {
  if (batch == 0) throw Error(Errc::InvalidArgument, "fake batch must be non-empty");
  if (gen.output_size() != shape.input_size()) {
    throw Error(Errc::ShapeMismatch, "generator output does not match the model input");
  }
  nn::Tensor out({batch, shape.steps, shape.features});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(gen.latent_dim());
  Generator::Trace trace;
  for (std::size_t b = 0; b < batch; ++b) {
    for (double& v : z) v = normal(rng);
    gen.forward(z, trace);
    std::copy(trace.out.begin(), trace.out.end(), out.data.begin() + b * shape.input_size());
  }
  return out;
}

SganNet::SganNet(const NetShape& shape, std::size_t latent_dim, std::size_t generator_hidden)
    : backbone(shape),
      classifier("cls_head", shape.representation_size(), 2),
      discriminator("disc_head", shape.representation_size(), 1),
      generator(shape, latent_dim, generator_hidden) {}

void SganNet::init(nn::Rng& rng) {
  backbone.init(rng);
  classifier.init(rng);
  discriminator.init(rng);
  generator.init(rng);
}

std::array<double, 2> SganNet::classify(std::span<const double> x) const {
  nn::Rng unused;
  Backbone::Trace trace;
  backbone.forward(x, nn::Mode::Eval, unused, trace);
  std::array<double, 2> logits{};
  classifier.forward(trace.rep, logits);
  const auto p = nn::softmax(logits);
  return {p[0], p[1]};
}

double SganNet::discriminate(std::span<const double> x) const {
  nn::Rng unused;
  Backbone::Trace trace;
  backbone.forward(x, nn::Mode::Eval, unused, trace);
  double logit = 0.0;
  discriminator.forward(trace.rep, std::span<double>(&logit, 1));
  return nn::sigmoid(logit);
}

std::vector<double> SganNet::predict(std::span<const data::SequenceSample> samples) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(classify(s.inputs)[1]);
  return out;
}

nn::ParamList SganNet::classifier_params() {
  nn::ParamList list;
  backbone.collect(list);
  classifier.collect(list);
  return list;
}

nn::ParamList SganNet::discriminator_params() {
  nn::ParamList list;
  backbone.collect(list);
  discriminator.collect(list);
  return list;
}

nn::ParamList SganNet::generator_params() {
  nn::ParamList list;
  generator.collect(list);
  return list;
}

nn::ParamList SganNet::all_params() {
  nn::ParamList list;
  backbone.collect(list);
  classifier.collect(list);
  discriminator.collect(list);
  generator.collect(list);
  return list;
}

double classifier_loss_and_grad(SganNet& net, std::span<const data::SequenceSample> batch,
                                nn::Mode mode, nn::Rng& rng) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "classifier batch is empty");
  nn::zero_grads(net.all_params());
  const std::size_t R = net.shape().representation_size();
  Backbone::Trace trace;
  std::array<double, 2> logits{};
  std::vector<double> d_rep(R);
  double total = 0.0;
  for (const auto& s : batch) {
    net.backbone.forward(s.inputs, mode, rng, trace);
    net.classifier.forward(trace.rep, logits);
    const auto cls = static_cast<std::size_t>(s.label);
    total += nn::softmax_ce_loss(logits, cls);
    const auto d_logits = nn::softmax_ce_grad(logits, cls);
    net.classifier.backward(trace.rep, d_logits, d_rep);
    net.backbone.backward(trace, d_rep, {});
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  nn::scale_grads(net.all_params(), inv);
  return total * inv;
}

double discriminator_loss_and_grad(SganNet& net, std::span<const double> inputs,
                                   std::size_t batch, int target, nn::Mode mode, nn::Rng& rng) {
  const std::size_t width = net.shape().input_size();
  if (batch == 0) throw Error(Errc::EmptyBatch, "discriminator batch is empty");
  if (inputs.size() != batch * width) {
    throw Error(Errc::ShapeMismatch, "discriminator batch size does not match inputs");
  }
  nn::zero_grads(net.all_params());
  const std::size_t R = net.shape().representation_size();
  Backbone::Trace trace;
  std::vector<double> d_rep(R);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    net.backbone.forward(inputs.subspan(b * width, width), mode, rng, trace);
    double logit = 0.0;
    net.discriminator.forward(trace.rep, std::span<double>(&logit, 1));
    const auto lg = nn::bce_with_logit(logit, target);
    total += lg.loss;
    net.discriminator.backward(trace.rep, std::span<const double>(&lg.d_logit, 1), d_rep);
    net.backbone.backward(trace, d_rep, {});
  }
  const double inv = 1.0 / static_cast<double>(batch);
  nn::scale_grads(net.all_params(), inv);
  return total * inv;
}

double generator_loss_and_grad(SganNet& net, const nn::Tensor& latent, nn::Mode mode,
                               nn::Rng& rng) {
  const std::size_t L = net.generator.latent_dim();
  if (latent.shape.size() != 2 || latent.shape[1] != L) {
    throw Error(Errc::ShapeMismatch, fmt::format("latent batch must be n x {}", L));
  }
  const std::size_t batch = latent.shape[0];
  if (batch == 0) throw Error(Errc::EmptyBatch, "generator batch is empty");
  nn::zero_grads(net.all_params());
  const std::size_t R = net.shape().representation_size();
  Generator::Trace gtrace;
  Backbone::Trace trace;
  std::vector<double> d_rep(R), d_x(net.shape().input_size());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    net.generator.forward(latent.span().subspan(b * L, L), gtrace);
    net.backbone.forward(gtrace.out, mode, rng, trace);
    double logit = 0.0;
    net.discriminator.forward(trace.rep, std::span<double>(&logit, 1));
    const auto lg = nn::bce_with_logit(logit, 1);
    total += lg.loss;
    net.discriminator.backward(trace.rep, std::span<const double>(&lg.d_logit, 1), d_rep);
    net.backbone.backward(trace, d_rep, d_x);
    net.generator.backward(gtrace, d_x);
  }
  const double inv = 1.0 / static_cast<double>(batch);
  nn::scale_grads(net.all_params(), inv);
  return total * inv;
}

SganStepLosses sgan_train_step(SganNet& net, std::span<const data::SequenceSample> labeled_batch,
                               std::span<const data::SequenceSample> unlabeled_batch,
                               const TrainConfig& cfg, nn::Rng& rng) {
  if (labeled_batch.empty() || unlabeled_batch.empty()) {
    throw Error(Errc::EmptyBatch, "SGAN step needs labeled and unlabeled samples");
  }
  const auto adam = cfg.adam();
  SganStepLosses losses;

  losses.c_loss = classifier_loss_and_grad(net, labeled_batch, nn::Mode::Train, rng);
  nn::adam_step(net.classifier_params(), adam);

  const std::size_t n = unlabeled_batch.size();
  const std::size_t width = net.shape().input_size();
  std::vector<double> real;
  real.reserve(n * width);
  for (const auto& s : unlabeled_batch) {
    if (s.inputs.size() != width) throw Error(Errc::ShapeMismatch, "unlabeled sample shape");
    real.insert(real.end(), s.inputs.begin(), s.inputs.end());
  }
  losses.d_loss_real = discriminator_loss_and_grad(net, real, n, 1, nn::Mode::Train, rng);
  nn::adam_step(net.discriminator_params(), adam);

  const auto fake = generate_fake(net.generator, net.shape(), n, rng);
  losses.d_loss_fake = discriminator_loss_and_grad(net, fake.data, n, 0, nn::Mode::Train, rng);
  nn::adam_step(net.discriminator_params(), adam);

  nn::Tensor latent({n, net.generator.latent_dim()});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : latent.data) v = normal(rng);
  losses.g_loss = generator_loss_and_grad(net, latent, nn::Mode::Train, rng);
  nn::adam_step(net.generator_params(), adam);
  return losses;
}

SganTrace train_sgan(SganNet& net, std::span<const data::SequenceSample> train,
                     const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw Error(Errc::EmptyTrainSet, "no training samples");
  std::vector<std::size_t> labeled_idx;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].inputs.size() != net.shape().input_size()) {
      throw Error(Errc::ShapeMismatch, "training sample does not match the network input shape");
    }
    if (train[i].labeled) labeled_idx.push_back(i);
  }
  if (labeled_idx.empty()) throw Error(Errc::EmptyLabeledSet, "no labeled training samples");

  nn::Rng rng(data::mix_seed(cfg.seed, 0x6u));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(labeled_idx.begin(), labeled_idx.end(), rng);
  std::size_t labeled_cursor = 0;
  const std::size_t labeled_batch_size = std::min(cfg.batch_size, labeled_idx.size());

  SganTrace trace;
  std::vector<data::SequenceSample> labeled_batch, unlabeled_batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    SganStepLosses sum;
    std::size_t steps = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      unlabeled_batch.clear();
      for (std::size_t k = b; k < e; ++k) {
        unlabeled_batch.push_back(train[order[k]]);
        unlabeled_batch.back().labeled = false;
      }
      labeled_batch.clear();
      for (std::size_t k = 0; k < labeled_batch_size; ++k) {
        if (labeled_cursor == labeled_idx.size()) {
          std::shuffle(labeled_idx.begin(), labeled_idx.end(), rng);
          labeled_cursor = 0;
        }
        labeled_batch.push_back(train[labeled_idx[labeled_cursor++]]);
      }
      const auto step = sgan_train_step(net, labeled_batch, unlabeled_batch, cfg, rng);
      sum.c_loss += step.c_loss;
      sum.d_loss_real += step.d_loss_real;
      sum.d_loss_fake += step.d_loss_fake;
      sum.g_loss += step.g_loss;
      ++steps;
    }
    const double inv = 1.0 / static_cast<double>(steps);
    trace.epochs.push_back({sum.c_loss * inv, sum.d_loss_real * inv, sum.d_loss_fake * inv,
                            sum.g_loss * inv});
  }
  return trace;
}

}  // namespace affect::models
