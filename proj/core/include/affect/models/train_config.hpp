#pragma once

#include <cstdint>

#include "affect/nn/adam.hpp"

namespace affect::models {

struct TrainConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double labeled_fraction = 0.3;
  std::size_t latent_dim = 50;
  std::size_t generator_hidden = 128;

  static TrainConfig supervised_defaults() { return {}; }
  static TrainConfig sgan_defaults() {
    TrainConfig cfg;
    cfg.epochs = 30;
    return cfg;
  }

  nn::AdamConfig adam() const {
    nn::AdamConfig a;
    a.lr = lr;
    return a;
  }

  /// Throws InvalidArgument on non-positive sizes or a fraction outside (0, 1].
  void validate() const;
};

}  // namespace affect::models
