#pragma once

#include "affect/nn/tensor.hpp"

namespace affect::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update of every listed parameter from its
/// accumulated gradient. Each Param keeps its own moments and step count.
void adam_step(const ParamList& params, const AdamConfig& cfg);

}  // namespace affect::nn
