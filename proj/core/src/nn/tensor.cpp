#include "affect/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace affect::nn {

std::size_t element_count(std::span<const std::size_t> shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> dims)
    : shape(std::move(dims)), data(element_count(shape), 0.0) {}

void Tensor::fill(double value) { std::fill(data.begin(), data.end(), value); }

Param::Param(std::string param_name, std::vector<std::size_t> dims)
    : name(std::move(param_name)), value(dims), grad(dims), m(dims), v(std::move(dims)) {}

void Param::zero_grad() { grad.fill(0.0); }

void zero_grads(const ParamList& params) {
  for (auto* p : params) p->zero_grad();
}

void scale_grads(const ParamList& params, double factor) {
  for (auto* p : params) {
    for (double& g : p->grad.data) g *= factor;
  }
}

std::size_t parameter_count(const ParamList& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->value.size();
  return n;
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (double& x : t.data) x = dist(rng);
}

}  // namespace affect::nn
