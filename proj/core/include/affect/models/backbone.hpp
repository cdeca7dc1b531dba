#pragma once

#include <span>
#include <vector>

#include "affect/nn/layers.hpp"
#include "affect/nn/lstm.hpp"

namespace affect::models {

struct NetShape {
  std::size_t steps = 10;
  std::size_t features = 30;
  std::size_t hidden = 10;  // per direction
  double dropout = 0.2;

  std::size_t input_size() const noexcept { return steps * features; }
  std::size_t representation_size() const noexcept { return 2 * hidden; }
};

/// BiLSTM(seq) -> dropout -> BiLSTM(final) -> dropout, yielding the 2H
/// representation both model heads read from.
class Backbone {
 public:
  Backbone() = default;
  explicit Backbone(const NetShape& shape);

  struct Trace {
    nn::BiLstmLayer::Trace first;
    nn::BiLstmLayer::Trace second;
    nn::DropoutMask drop1;
    nn::DropoutMask drop2;
    std::vector<double> h1;       // T x 2H
    std::vector<double> h1_drop;  // T x 2H
    std::vector<double> h2;       // 2H
    std::vector<double> rep;      // 2H, after dropout
    bool recorded = false;
  };

  const NetShape& shape() const noexcept { return shape_; }

  void init(nn::Rng& rng);
  void forward(std::span<const double> x, nn::Mode mode, nn::Rng& rng, Trace& trace) const;
  /// Accumulates parameter gradients; writes the input gradient when d_x is non-empty.
  void backward(const Trace& trace, std::span<const double> d_rep, std::span<double> d_x);
  void collect(nn::ParamList& out);

  nn::BiLstmLayer first;
  nn::BiLstmLayer second;

 private:
  NetShape shape_;
};

}  // namespace affect::models
