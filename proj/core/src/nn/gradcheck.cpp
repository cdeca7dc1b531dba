#include "affect/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace affect::nn {

double relative_error(double analytic, double numeric, double floor) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult check_gradients(std::string name, const ParamList& params,
                                const std::function<double()>& loss,
                                const std::function<void()>& analytic, double step) {
  GradCheckResult result;
  result.name = std::move(name);
  analytic();
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (const auto* p : params) grads.push_back(p->grad.data);

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = loss();
      p.value[i] = saved - step;
      const double down = loss();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double rel = relative_error(grads[pi][i], numeric);
      result.max_abs_error = std::max(result.max_abs_error, std::abs(grads[pi][i] - numeric));
      if (rel > result.max_rel_error || result.entries_checked == 0) {
        result.max_rel_error = std::max(result.max_rel_error, rel);
        result.worst_entry = fmt::format("{}[{}]", p.name, i);
      }
      ++result.entries_checked;
    }
  }
  return result;
}

}  // namespace affect::nn
