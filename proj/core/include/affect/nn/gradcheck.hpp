#pragma once

#include <functional>
#include <string>

#include "affect/nn/tensor.hpp"

namespace affect::nn {

inline constexpr double kFiniteDifferenceStep = 1e-5;
/// Denominator floor of the relative error, so gradients that are zero up to
/// rounding are compared in absolute terms.
inline constexpr double kRelativeErrorFloor = 1e-7;

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst_entry;
};

double relative_error(double analytic, double numeric, double floor = kRelativeErrorFloor) noexcept;

/// Compares the gradients written by `analytic` (which must zero and then
/// fill the grads of `params`) against central differences of `loss`.
/// `loss` must be a deterministic function of the parameter values.
GradCheckResult check_gradients(std::string name, const ParamList& params,
                                const std::function<double()>& loss,
                                const std::function<void()>& analytic,
                                double step = kFiniteDifferenceStep);

}  // namespace affect::nn
