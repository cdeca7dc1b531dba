#pragma once

// Semi-supervised GAN: one backbone feeds both a 2-way softmax classifier
// head and a real/fake sigmoid discriminator head; a small dense generator
// produces fake input sequences.

#include <array>
#include <span>
#include <vector>

#include "affect/dataset.hpp"
#include "affect/models/backbone.hpp"
#include "affect/models/train_config.hpp"
#include "affect/nn/layers.hpp"
#include "affect/nn/tensor.hpp"

namespace affect::models {

/// latent -> dense(ReLU) -> dense(linear) -> steps x features.
class Generator {
 public:
  Generator() = default;
  Generator(const NetShape& shape, std::size_t latent_dim, std::size_t hidden);

  struct Trace {
    std::vector<double> z;
    std::vector<double> pre;     // hidden pre-activation
    std::vector<double> hidden;  // after ReLU
    std::vector<double> out;
  };

  std::size_t latent_dim() const noexcept { return hidden_layer.in(); }
  std::size_t output_size() const noexcept { return output_layer.out(); }

  void init(nn::Rng& rng);
  void forward(std::span<const double> z, Trace& trace) const;
  void backward(const Trace& trace, std::span<const double> d_out);
  void collect(nn::ParamList& out);

  nn::DenseLayer hidden_layer;
  nn::DenseLayer output_layer;
};

/// Latents drawn i.i.d. N(0, 1); returns a batch x steps x features tensor.
nn::Tensor generate_fake(const Generator& gen, const NetShape& shape, std::size_t batch,
                         nn::Rng& rng);

class SganNet {
 public:
  explicit SganNet(const NetShape& shape = {}, std::size_t latent_dim = 50,
                   std::size_t generator_hidden = 128);

  const NetShape& shape() const noexcept { return backbone.shape(); }

  void init(nn::Rng& rng);

  /// Eval-mode class probabilities {not stressed, stressed}.
  std::array<double, 2> classify(std::span<const double> x) const;
  /// Eval-mode probability that x is real.
  double discriminate(std::span<const double> x) const;
  /// Stressed-class probability per sample.
  std::vector<double> predict(std::span<const data::SequenceSample> samples) const;

  /// Backbone + classifier head. Shares the backbone Params with
  /// discriminator_params().
  nn::ParamList classifier_params();
  /// Backbone + discriminator head.
  nn::ParamList discriminator_params();
  nn::ParamList generator_params();
  nn::ParamList all_params();

  Backbone backbone;
  nn::DenseLayer classifier;
  nn::DenseLayer discriminator;
  Generator generator;
};

// Each *_loss_and_grad zeroes every gradient of the net, then leaves the
// batch-mean gradient of the returned mean loss in the relevant params.

/// Softmax cross-entropy of the classifier head on labeled samples.
double classifier_loss_and_grad(SganNet& net, std::span<const data::SequenceSample> batch,
                                nn::Mode mode, nn::Rng& rng);
/// BCE of the discriminator head against `target` (1 real, 0 fake) on a
/// batch of flattened inputs (batch x steps*features).
double discriminator_loss_and_grad(SganNet& net, std::span<const double> inputs,
                                   std::size_t batch, int target, nn::Mode mode, nn::Rng& rng);
/// BCE of D(G(z)) against "real"; gradients reach the generator through the
/// discriminator head and backbone (whose grads are also populated but are
/// not meant to be applied).
double generator_loss_and_grad(SganNet& net, const nn::Tensor& latent, nn::Mode mode,
                               nn::Rng& rng);

struct SganStepLosses {
  double c_loss = 0.0;
  double d_loss_real = 0.0;
  double d_loss_fake = 0.0;
  double g_loss = 0.0;
};

/// One round of updates, in order: classifier (labeled), discriminator on
/// real (unlabeled) then fake, generator through the frozen discriminator.
SganStepLosses sgan_train_step(SganNet& net, std::span<const data::SequenceSample> labeled_batch,
                               std::span<const data::SequenceSample> unlabeled_batch,
                               const TrainConfig& cfg, nn::Rng& rng);

struct SganTrace {
  std::vector<SganStepLosses> epochs;  // per-epoch means
};

/// Iterates sgan_train_step over shuffled batches of every training sample
/// (labels hidden), cycling through the smaller labeled subset alongside.
SganTrace train_sgan(SganNet& net, std::span<const data::SequenceSample> train,
                     const TrainConfig& cfg);

}  // namespace affect::models
