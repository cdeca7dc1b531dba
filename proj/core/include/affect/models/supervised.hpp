#pragma once

#include <span>
#include <vector>

#include "affect/dataset.hpp"
#include "affect/models/backbone.hpp"
#include "affect/models/train_config.hpp"
#include "affect/nn/layers.hpp"

namespace affect::models {

/// Backbone -> dense(2H -> 1) -> sigmoid.
class SupervisedNet {
 public:
  explicit SupervisedNet(const NetShape& shape = {});

  /// What one forward pass leaves behind for backward().
  struct Record {
    Backbone::Trace backbone;
    double logit = 0.0;
    double prob = 0.0;
    bool recorded = false;
  };

  const NetShape& shape() const noexcept { return backbone.shape(); }

  void init(nn::Rng& rng);
  double forward(std::span<const double> x, nn::Mode mode, nn::Rng& rng, Record& rec) const;
  /// Accumulates gradients of a loss whose derivative w.r.t. the logit is
  /// d_logit. Throws NoForwardRecorded if rec is empty.
  void backward(const Record& rec, double d_logit, std::span<double> d_x = {});

  /// Eval-mode probability for one input.
  double predict(std::span<const double> x) const;
  std::vector<double> predict(std::span<const data::SequenceSample> samples) const;

  nn::ParamList params();

  Backbone backbone;
  nn::DenseLayer head;
};

/// Mean BCE over `batch` (train or eval mode) with gradients left as the
/// batch-mean gradient in the net's params (which are zeroed first).
double supervised_loss_and_grad(SupervisedNet& net, std::span<const data::SequenceSample> batch,
                                nn::Mode mode, nn::Rng& rng);

struct SupervisedTrace {
  std::vector<double> epoch_loss;
};

/// Mini-batch Adam on BCE. Dropout is active during training; the shuffle and
/// dropout streams derive from cfg.seed. Does not re-initialize the net.
SupervisedTrace train_supervised(SupervisedNet& net,
                                 std::span<const data::SequenceSample> train,
                                 const TrainConfig& cfg);

}  // namespace affect::models
