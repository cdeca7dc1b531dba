#include "affect/nn/adam.hpp"

#include <cmath>

namespace affect::nn {

void adam_step(const ParamList& params, const AdamConfig& cfg) {
  for (Param* p : params) {
    ++p->step;
    const double t = static_cast<double>(p->step);
    const double corr1 = 1.0 - std::pow(cfg.beta1, t);
    const double corr2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      p->m[i] = cfg.beta1 * p->m[i] + (1.0 - cfg.beta1) * g;
      p->v[i] = cfg.beta2 * p->v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = p->m[i] / corr1;
      const double v_hat = p->v[i] / corr2;
      p->value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace affect::nn
