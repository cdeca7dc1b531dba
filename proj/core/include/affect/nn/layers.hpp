#pragma once

#include <span>
#include <string>
#include <vector>

#include "affect/nn/tensor.hpp"

namespace affect::nn {

enum class Mode { Train, Eval };

double sigmoid(double x) noexcept;
std::vector<double> softmax(std::span<const double> logits);

inline constexpr double kProbClamp = 1e-7;

/// Binary cross-entropy on a probability clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p_hat, int y) noexcept;

struct LossAndGrad {
  double loss = 0.0;
  double d_logit = 0.0;
};

/// Sigmoid + BCE on a logit. The loss uses the clamped probability; the
/// gradient is the exact derivative sigmoid(z) - y of the unclamped loss.
LossAndGrad bce_with_logit(double logit, int y) noexcept;

/// Cross-entropy of softmax(logits) against class_idx (log-sum-exp form).
double softmax_ce_loss(std::span<const double> logits, std::size_t class_idx);
/// d loss / d logits = softmax(logits) - onehot(class_idx).
std::vector<double> softmax_ce_grad(std::span<const double> logits, std::size_t class_idx);

/// y = W x + b with W stored out x in.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::string name, std::size_t in, std::size_t out);

  std::size_t in() const noexcept { return in_; }
  std::size_t out() const noexcept { return out_; }

  void init(Rng& rng);
  void forward(std::span<const double> x, std::span<double> y) const;
  /// Accumulates dW, db; writes dx when non-empty.
  void backward(std::span<const double> x, std::span<const double> dy, std::span<double> dx);
  void collect(ParamList& out);

  Param weight;
  Param bias;

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
};

/// Per-entry multipliers: 0 for dropped units, 1/(1-p) for survivors.
/// Empty in eval mode (identity).
struct DropoutMask {
  std::vector<double> scale;
};

void dropout_forward(std::span<const double> x, double p, Mode mode, Rng& rng,
                     std::span<double> y, DropoutMask& mask);
std::vector<double> dropout_forward(std::span<const double> x, double p, Mode mode, Rng& rng);
void dropout_backward(const DropoutMask& mask, std::span<const double> dy, std::span<double> dx);

}  // namespace affect::nn
