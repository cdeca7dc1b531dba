#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace affect::nn {

using Rng = std::mt19937_64;

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;  // row-major

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);

  std::size_t size() const noexcept { return data.size(); }
  std::span<double> span() noexcept { return data; }
  std::span<const double> span() const noexcept { return data; }
  double& operator[](std::size_t i) noexcept { return data[i]; }
  double operator[](std::size_t i) const noexcept { return data[i]; }
  void fill(double value);
};

std::size_t element_count(std::span<const std::size_t> shape) noexcept;

/// A trainable tensor together with its gradient and Adam moments.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  std::int64_t step = 0;

  Param() = default;
  Param(std::string name, std::vector<std::size_t> shape);

  void zero_grad();
};

/// Ordered, non-owning view of a model's parameters. Two lists may point at
/// the same Param (shared layers).
using ParamList = std::vector<Param*>;

void zero_grads(const ParamList& params);
void scale_grads(const ParamList& params, double factor);
std::size_t parameter_count(const ParamList& params);

/// Glorot-uniform fill: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace affect::nn
