#pragma once

// LSTM without peepholes:
//   i = sig(W_i x + U_i h + b_i)    f = sig(W_f x + U_f h + b_f)
//   g = tanh(W_g x + U_g h + b_g)   o = sig(W_o x + U_o h + b_o)
//   c' = f*c + i*g                  h' = o*tanh(c')
// Gate blocks are stacked row-wise in the order [input, forget, cell, output].

#include <span>
#include <string>
#include <vector>

#include "affect/nn/tensor.hpp"

namespace affect::nn {

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };

struct LstmCellParams {
  LstmCellParams() = default;
  LstmCellParams(std::string name, std::size_t in, std::size_t hidden);

  Param w_input;      // 4H x in
  Param w_recurrent;  // 4H x H
  Param bias;         // 4H
  std::size_t in = 0;
  std::size_t hidden = 0;

  /// Glorot-uniform per gate block, forget-gate bias 1, other biases 0.
  void init(Rng& rng);
  void collect(ParamList& out);
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

LstmState lstm_cell_step(const LstmCellParams& p, std::span<const double> x,
                         std::span<const double> h_prev, std::span<const double> c_prev);

/// Everything one direction's backward pass needs, stored in processing order.
struct LstmTrace {
  std::size_t steps = 0;
  bool reverse = false;
  std::vector<double> x;       // T x in
  std::vector<double> h;       // (T+1) x H, row 0 is the zero initial state
  std::vector<double> c;       // (T+1) x H
  std::vector<double> gates;   // T x 4H, post-activation
  std::vector<double> tanh_c;  // T x H
};

/// Runs the cell over `xs` (T x in, original order), back to front when
/// `reverse` is set, starting from zero state.
void lstm_sequence_forward(const LstmCellParams& p, std::span<const double> xs,
                           std::size_t steps, bool reverse, LstmTrace& trace);

/// Hidden state produced at original time index t.
std::span<const double> lstm_output_at(const LstmTrace& trace, std::size_t hidden,
                                       std::size_t t);

/// BPTT. `d_h` is T x H aligned to original time order; accumulates parameter
/// gradients and, when `d_xs` is non-empty, adds input gradients into it.
void lstm_sequence_backward(LstmCellParams& p, const LstmTrace& trace,
                            std::span<const double> d_h, std::span<double> d_xs);

class BiLstmLayer {
 public:
  BiLstmLayer() = default;
  BiLstmLayer(std::string name, std::size_t in, std::size_t hidden, bool return_sequences);

  struct Trace {
    LstmTrace fwd;
    LstmTrace bwd;
  };

  std::size_t in() const noexcept { return forward_cell.in; }
  std::size_t hidden() const noexcept { return forward_cell.hidden; }
  bool return_sequences() const noexcept { return return_sequences_; }
  /// T x 2H when returning sequences, else 2H.
  std::size_t output_size(std::size_t steps) const noexcept;

  void init(Rng& rng);
  /// Sequence mode: row t = [h_fwd(t), h_bwd(t)]. Final mode: the last state
  /// of each direction, [h_fwd(T-1), h_bwd(0)].
  void forward(std::span<const double> xs, std::size_t steps, Trace& trace,
               std::span<double> out) const;
  /// Writes d_xs (T x in) when non-empty.
  void backward(const Trace& trace, std::span<const double> d_out, std::span<double> d_xs);
  void collect(ParamList& out);

  LstmCellParams forward_cell;
  LstmCellParams backward_cell;

 private:
  bool return_sequences_ = true;
};

/// Bidirectional pass with concatenated per-step outputs (T x 2H).
std::vector<double> bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                   std::span<const double> seq, std::size_t steps);

}  // namespace affect::nn
