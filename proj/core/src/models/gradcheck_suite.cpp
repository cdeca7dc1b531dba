#include "affect/models/gradcheck_suite.hpp"

#include <random>

#include "affect/models/sgan.hpp"
#include "affect/models/supervised.hpp"
#include "affect/nn/layers.hpp"
#include "affect/nn/lstm.hpp"

namespace affect::models {

using nn::GradCheckResult;
using nn::Param;
using nn::ParamList;
using nn::Rng;

namespace {

constexpr std::size_t kProbeFeatures = 3;
constexpr std::size_t kProbeHidden = 2;
constexpr std::size_t kProbeSteps = 4;

void fill_normal(nn::Tensor& t, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  for (double& v : t.data) v = d(rng);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

GradCheckResult check_dense(Rng& rng) {
  nn::DenseLayer layer("dense", 4, 3);
  layer.init(rng);
  fill_normal(layer.bias.value, rng, 0.5);
  Param x("input", {4});
  fill_normal(x.value, rng);
  std::vector<double> c(3);
  for (double& v : c) v = std::normal_distribution<double>(0.0, 1.0)(rng);
  ParamList params;
  layer.collect(params);
  params.push_back(&x);
  std::vector<double> y(3);
  auto loss = [&] {
    layer.forward(x.value.data, y);
    return dot(c, y);
  };
  auto analytic = [&] {
    nn::zero_grads(params);
    layer.backward(x.value.data, c, x.grad.data);
  };
  return nn::check_gradients("dense", params, loss, analytic);
}

GradCheckResult check_dropout(Rng& rng, nn::Mode mode, const char* name) {
  Param x("input", {6});
  fill_normal(x.value, rng);
  std::vector<double> c(6);
  for (double& v : c) v = std::normal_distribution<double>(0.0, 1.0)(rng);
  const auto mask_seed = rng();
  ParamList params{&x};
  nn::DropoutMask mask;
  std::vector<double> y(6);
  auto loss = [&] {
    Rng r(mask_seed);  // same mask on every evaluation
    nn::dropout_forward(x.value.data, 0.5, mode, r, y, mask);
    return dot(c, y);
  };
  auto analytic = [&] {
    nn::zero_grads(params);
    loss();
    nn::dropout_backward(mask, c, x.grad.data);
  };
  return nn::check_gradients(name, params, loss, analytic);
}

GradCheckResult check_sigmoid_bce(Rng& rng) {
  nn::DenseLayer layer("logit", 4, 1);
  layer.init(rng);
  Param x("input", {4});
  fill_normal(x.value, rng);
  ParamList params;
  layer.collect(params);
  params.push_back(&x);
  auto loss = [&] {
    double z = 0.0;
    layer.forward(x.value.data, std::span<double>(&z, 1));
    return nn::bce_loss(nn::sigmoid(z), 1) + nn::bce_loss(nn::sigmoid(-0.5 * z), 0);
  };
  auto analytic = [&] {
    nn::zero_grads(params);
    double z = 0.0;
    layer.forward(x.value.data, std::span<double>(&z, 1));
    const double dz = nn::bce_with_logit(z, 1).d_logit - 0.5 * nn::bce_with_logit(-0.5 * z, 0).d_logit;
    layer.backward(x.value.data, std::span<const double>(&dz, 1), x.grad.data);
  };
  return nn::check_gradients("sigmoid+bce", params, loss, analytic);
}

GradCheckResult check_softmax_ce(Rng& rng) {
  nn::DenseLayer layer("logits", 4, 3);
  layer.init(rng);
  Param x("input", {4});
  fill_normal(x.value, rng);
  ParamList params;
  layer.collect(params);
  params.push_back(&x);
  std::vector<double> z(3);
  auto loss = [&] {
    layer.forward(x.value.data, z);
    return nn::softmax_ce_loss(z, 2);
  };
  auto analytic = [&] {
    nn::zero_grads(params);
    layer.forward(x.value.data, z);
    const auto dz = nn::softmax_ce_grad(z, 2);
    layer.backward(x.value.data, dz, x.grad.data);
  };
  return nn::check_gradients("softmax+ce", params, loss, analytic);
}

GradCheckResult check_lstm(Rng& rng) {
  nn::LstmCellParams cell("lstm", kProbeFeatures, kProbeHidden);
  cell.init(rng);
  fill_normal(cell.bias.value, rng, 0.5);
  Param xs("input", {kProbeSteps, kProbeFeatures});
  fill_normal(xs.value, rng);
  nn::Tensor c({kProbeSteps, kProbeHidden});
  fill_normal(c, rng);
  ParamList params;
  cell.collect(params);
  params.push_back(&xs);
  nn::LstmTrace trace;
  auto loss = [&] {
    nn::lstm_sequence_forward(cell, xs.value.data, kProbeSteps, false, trace);
    double s = 0.0;
    for (std::size_t t = 0; t < kProbeSteps; ++t) {
      s += dot(c.span().subspan(t * kProbeHidden, kProbeHidden),
               nn::lstm_output_at(trace, kProbeHidden, t));
    }
    return s;
  };
  auto analytic = [&] {
    nn::zero_grads(params);
    loss();
    nn::lstm_sequence_backward(cell, trace, c.data, xs.grad.data);
  };
  return nn::check_gradients("lstm cell (T=4)", params, loss, analytic);
}

GradCheckResult check_bilstm_stack(Rng& rng) {
  nn::BiLstmLayer l1("bi1", kProbeFeatures, kProbeHidden, true);
  nn::BiLstmLayer l2("bi2", 2 * kProbeHidden, kProbeHidden, false);
  l1.init(rng);
  l2.init(rng);
  Param xs("input", {kProbeSteps, kProbeFeatures});
  fill_normal(xs.value, rng);
  std::vector<double> c(2 * kProbeHidden);
  for (double& v : c) v = std::normal_distribution<double>(0.0, 1.0)(rng);
  ParamList params;
  l1.collect(params);
  l2.collect(params);
  params.push_back(&xs);
  nn::BiLstmLayer::Trace t1, t2;
  std::vector<double> h1(l1.output_size(kProbeSteps)), h2(l2.output_size(kProbeSteps));
  auto loss = [&] {
    l1.forward(xs.value.data, kProbeSteps, t1, h1);
    l2.forward(h1, kProbeSteps, t2, h2);
    return dot(c, h2);
  };
  auto analytic = [&] {
    nn::zero_grads(params);
    loss();
    std::vector<double> d_h1(h1.size());
    l2.backward(t2, c, d_h1);
    l1.backward(t1, d_h1, xs.grad.data);
  };
  return nn::check_gradients("bi-lstm stack", params, loss, analytic);
}

NetShape probe_shape() {
  NetShape shape;
  shape.features = kProbeFeatures;
  shape.hidden = kProbeHidden;
  shape.steps = kProbeSteps;
  return shape;
}

GradCheckResult check_supervised(Rng& rng) {
  SupervisedNet net(probe_shape());
  net.init(rng);
  std::vector<data::SequenceSample> batch(2);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    auto& s = batch[k];
    s.steps = kProbeSteps;
    s.features = kProbeFeatures;
    s.inputs.resize(kProbeSteps * kProbeFeatures);
    for (double& v : s.inputs) v = std::normal_distribution<double>(0.0, 1.0)(rng);
    s.label = static_cast<int>(k % 2);
  }
  auto params = net.params();
  Rng unused;
  auto loss = [&] {
    SupervisedNet::Record rec;
    double s = 0.0;
    for (const auto& b : batch) s += nn::bce_loss(net.forward(b.inputs, nn::Mode::Eval, unused, rec), b.label);
    return s / static_cast<double>(batch.size());
  };
  auto analytic = [&] { supervised_loss_and_grad(net, batch, nn::Mode::Eval, unused); };
  return nn::check_gradients("supervised net", params, loss, analytic);
}

SganNet probe_sgan(Rng& rng) {
  SganNet net(probe_shape(), 5, 6);
  net.init(rng);
  fill_normal(net.generator.hidden_layer.bias.value, rng, 0.5);
  return net;
}

GradCheckResult check_sgan_generator(Rng& rng) {
  auto net = probe_sgan(rng);
  nn::Tensor latent({2, 5});
  fill_normal(latent, rng);
  // Everything D(G(z)) touches: the frozen discriminator too, since the
  // generator's gradient is only as good as the one flowing through it.
  auto params = net.discriminator_params();
  for (auto* p : net.generator_params()) params.push_back(p);
  auto loss = [&] {
    Rng r;
    return generator_loss_and_grad(net, latent, nn::Mode::Eval, r);
  };
  return nn::check_gradients("sgan generator path", params, loss, loss);
}

GradCheckResult check_sgan_classifier(Rng& rng) {
  auto net = probe_sgan(rng);
  std::vector<data::SequenceSample> batch(2);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    auto& s = batch[k];
    s.steps = kProbeSteps;
    s.features = kProbeFeatures;
    s.inputs.resize(kProbeSteps * kProbeFeatures);
    for (double& v : s.inputs) v = std::normal_distribution<double>(0.0, 1.0)(rng);
    s.label = static_cast<int>(k % 2);
  }
  auto params = net.classifier_params();
  auto loss = [&] {
    Rng r;
    return classifier_loss_and_grad(net, batch, nn::Mode::Eval, r);
  };
  return nn::check_gradients("sgan classifier head", params, loss, loss);
}

GradCheckResult check_sgan_discriminator(Rng& rng) {
  auto net = probe_sgan(rng);
  std::vector<double> inputs(2 * kProbeSteps * kProbeFeatures);
  for (double& v : inputs) v = std::normal_distribution<double>(0.0, 1.0)(rng);
  auto params = net.discriminator_params();
  auto loss = [&] {
    Rng r;
    return discriminator_loss_and_grad(net, inputs, 2, 1, nn::Mode::Eval, r) +
           discriminator_loss_and_grad(net, inputs, 2, 0, nn::Mode::Eval, r);
  };
  auto analytic = [&] {
    Rng r;
    discriminator_loss_and_grad(net, inputs, 2, 1, nn::Mode::Eval, r);
    std::vector<std::vector<double>> first;
    for (auto* p : params) first.push_back(p->grad.data);
    discriminator_loss_and_grad(net, inputs, 2, 0, nn::Mode::Eval, r);
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (std::size_t j = 0; j < first[i].size(); ++j) params[i]->grad[j] += first[i][j];
    }
  };
  return nn::check_gradients("sgan discriminator head", params, loss, analytic);
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheckResult> results;
  results.push_back(check_dense(rng));
  results.push_back(check_dropout(rng, nn::Mode::Eval, "dropout (off)"));
  results.push_back(check_dropout(rng, nn::Mode::Train, "dropout (fixed mask)"));
  results.push_back(check_sigmoid_bce(rng));
  results.push_back(check_softmax_ce(rng));
  results.push_back(check_lstm(rng));
  results.push_back(check_bilstm_stack(rng));
  results.push_back(check_sgan_generator(rng));
  results.push_back(check_sgan_classifier(rng));
  results.push_back(check_sgan_discriminator(rng));
  results.push_back(check_supervised(rng));
  return results;
}

}  // namespace affect::models
