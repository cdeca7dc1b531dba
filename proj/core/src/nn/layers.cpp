#include "affect/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::nn {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

double bce_loss(double p_hat, int y) noexcept {
  const double p = std::clamp(p_hat, kProbClamp, 1.0 - kProbClamp);
  return y == 1 ? -std::log(p) : -std::log1p(-p);
}

LossAndGrad bce_with_logit(double logit, int y) noexcept {
  const double p = sigmoid(logit);
  return {bce_loss(p, y), p - static_cast<double>(y)};
}

double softmax_ce_loss(std::span<const double> logits, std::size_t class_idx) {
  if (class_idx >= logits.size()) throw Error(Errc::ShapeMismatch, "class index out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return mx + std::log(sum) - logits[class_idx];
}

std::vector<double> softmax_ce_grad(std::span<const double> logits, std::size_t class_idx) {
  if (class_idx >= logits.size()) throw Error(Errc::ShapeMismatch, "class index out of range");
  auto g = softmax(logits);
  g[class_idx] -= 1.0;
  return g;
}

DenseLayer::DenseLayer(std::string name, std::size_t in, std::size_t out)
    : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), in_(in), out_(out) {}

void DenseLayer::init(Rng& rng) {
  glorot_uniform(weight.value, in_, out_, rng);
  bias.value.fill(0.0);
}

void DenseLayer::forward(std::span<const double> x, std::span<double> y) const {
  if (x.size() != in_ || y.size() != out_) {
    throw Error(Errc::ShapeMismatch,
                fmt::format("{}: expected {}->{}, got {}->{}", weight.name, in_, out_, x.size(),
                            y.size()));
  }
  const double* w = weight.value.data.data();
  for (std::size_t o = 0; o < out_; ++o) {
    double acc = bias.value[o];
    const double* row = w + o * in_;
    for (std::size_t i = 0; i < in_; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void DenseLayer::backward(std::span<const double> x, std::span<const double> dy,
                          std::span<double> dx) {
  if (x.size() != in_ || dy.size() != out_ || (!dx.empty() && dx.size() != in_)) {
    throw Error(Errc::ShapeMismatch, weight.name + ": backward shape mismatch");
  }
  double* gw = weight.grad.data.data();
  const double* w = weight.value.data.data();
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), 0.0);
  for (std::size_t o = 0; o < out_; ++o) {
    const double g = dy[o];
    bias.grad[o] += g;
    double* grow = gw + o * in_;
    const double* row = w + o * in_;
    for (std::size_t i = 0; i < in_; ++i) grow[i] += g * x[i];
    if (!dx.empty()) {
      for (std::size_t i = 0; i < in_; ++i) dx[i] += g * row[i];
    }
  }
}

void DenseLayer::collect(ParamList& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

void dropout_forward(std::span<const double> x, double p, Mode mode, Rng& rng,
                     std::span<double> y, DropoutMask& mask) {
  if (x.size() != y.size()) throw Error(Errc::ShapeMismatch, "dropout input/output sizes");
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(Errc::InvalidArgument, fmt::format("dropout rate {} outside [0, 1)", p));
  }
  if (mode == Mode::Eval || p == 0.0) {
    mask.scale.clear();
    std::copy(x.begin(), x.end(), y.begin());
    return;
  }
  std::bernoulli_distribution drop(p);
  const double keep_scale = 1.0 / (1.0 - p);
  mask.scale.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask.scale[i] = drop(rng) ? 0.0 : keep_scale;
    y[i] = x[i] * mask.scale[i];
  }
}

std::vector<double> dropout_forward(std::span<const double> x, double p, Mode mode, Rng& rng) {
  std::vector<double> y(x.size());
  DropoutMask mask;
  dropout_forward(x, p, mode, rng, y, mask);
  return y;
}

void dropout_backward(const DropoutMask& mask, std::span<const double> dy, std::span<double> dx) {
  if (dy.size() != dx.size()) throw Error(Errc::ShapeMismatch, "dropout gradient sizes");
  if (mask.scale.empty()) {
    std::copy(dy.begin(), dy.end(), dx.begin());
    return;
  }
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask.scale[i];
}

}  // namespace affect::nn
