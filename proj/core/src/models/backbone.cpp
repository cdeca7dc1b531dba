#include "affect/models/backbone.hpp"

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::models {

Backbone::Backbone(const NetShape& shape)
    : first("bilstm1", shape.features, shape.hidden, true),
      second("bilstm2", 2 * shape.hidden, shape.hidden, false),
      shape_(shape) {}

void Backbone::init(nn::Rng& rng) {
  first.init(rng);
  second.init(rng);
}

void Backbone::forward(std::span<const double> x, nn::Mode mode, nn::Rng& rng,
                       Trace& trace) const {
  if (x.size() != shape_.input_size()) {
    throw Error(Errc::ShapeMismatch, fmt::format("backbone expects {}x{} input, got {} values",
                                                 shape_.steps, shape_.features, x.size()));
  }
  const std::size_t T = shape_.steps;
  const std::size_t R = shape_.representation_size();
  trace.h1.resize(T * R);
  trace.h1_drop.resize(T * R);
  trace.h2.resize(R);
  trace.rep.resize(R);
  first.forward(x, T, trace.first, trace.h1);
  nn::dropout_forward(trace.h1, shape_.dropout, mode, rng, trace.h1_drop, trace.drop1);
  second.forward(trace.h1_drop, T, trace.second, trace.h2);
  nn::dropout_forward(trace.h2, shape_.dropout, mode, rng, trace.rep, trace.drop2);
  trace.recorded = true;
}

void Backbone::backward(const Trace& trace, std::span<const double> d_rep,
                        std::span<double> d_x) {
  if (!trace.recorded) throw Error(Errc::NoForwardRecorded, "backbone backward without forward");
  const std::size_t T = shape_.steps;
  const std::size_t R = shape_.representation_size();
  std::vector<double> d_h2(R), d_h1_drop(T * R), d_h1(T * R);
  nn::dropout_backward(trace.drop2, d_rep, d_h2);
  second.backward(trace.second, d_h2, d_h1_drop);
  nn::dropout_backward(trace.drop1, d_h1_drop, d_h1);
  first.backward(trace.first, d_h1, d_x);
}

void Backbone::collect(nn::ParamList& out) {
  first.collect(out);
  second.collect(out);
}

}  // namespace affect::models
