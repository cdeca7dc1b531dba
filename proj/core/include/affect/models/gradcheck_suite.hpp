#pragma once

#include <cstdint>
#include <vector>

#include "affect/nn/gradcheck.hpp"

namespace affect::models {

/// Finite-difference checks of every layer type and of the composed models
/// on a tiny probe shape (F=3, H=2, T=4). Dropout-bearing paths run in eval
/// mode, except the fixed-mask dropout check.
std::vector<nn::GradCheckResult> run_gradcheck_suite(std::uint64_t seed);

}  // namespace affect::models
