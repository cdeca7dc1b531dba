#include "affect/nn/lstm.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "affect/error.hpp"
#include "affect/nn/layers.hpp"

namespace affect::nn {

LstmCellParams::LstmCellParams(std::string name, std::size_t in_size, std::size_t hidden_size)
    : w_input(name + ".w_input", {4 * hidden_size, in_size}),
      w_recurrent(name + ".w_recurrent", {4 * hidden_size, hidden_size}),
      bias(name + ".bias", {4 * hidden_size}),
      in(in_size),
      hidden(hidden_size) {}

void LstmCellParams::init(Rng& rng) {
  const double a_in = std::sqrt(6.0 / static_cast<double>(in + hidden));
  const double a_rec = std::sqrt(6.0 / static_cast<double>(2 * hidden));
  std::uniform_real_distribution<double> u_in(-a_in, a_in);
  std::uniform_real_distribution<double> u_rec(-a_rec, a_rec);
  for (double& w : w_input.value.data) w = u_in(rng);
  for (double& w : w_recurrent.value.data) w = u_rec(rng);
  bias.value.fill(0.0);
  for (std::size_t j = 0; j < hidden; ++j) bias.value[kForgetGate * hidden + j] = 1.0;
}

void LstmCellParams::collect(ParamList& out) {
  out.push_back(&w_input);
  out.push_back(&w_recurrent);
  out.push_back(&bias);
}

namespace {

/// pre = W x + U h + b, then gate nonlinearities in place.
void compute_gates(const LstmCellParams& p, const double* x, const double* h, double* gates) {
  const std::size_t H = p.hidden;
  const std::size_t I = p.in;
  const double* w = p.w_input.value.data.data();
  const double* u = p.w_recurrent.value.data.data();
  const double* b = p.bias.value.data.data();
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double acc = b[r];
    const double* wr = w + r * I;
    for (std::size_t k = 0; k < I; ++k) acc += wr[k] * x[k];
    const double* ur = u + r * H;
    for (std::size_t k = 0; k < H; ++k) acc += ur[k] * h[k];
    gates[r] = acc;
  }
  for (std::size_t j = 0; j < H; ++j) {
    gates[kInputGate * H + j] = sigmoid(gates[kInputGate * H + j]);
    gates[kForgetGate * H + j] = sigmoid(gates[kForgetGate * H + j]);
    gates[kCellGate * H + j] = std::tanh(gates[kCellGate * H + j]);
    gates[kOutputGate * H + j] = sigmoid(gates[kOutputGate * H + j]);
  }
}

/// Same sums in the same order as compute_gates, from transposed weights.
void gates_transposed(const LstmCellParams& p, const double* __restrict wt,
                      const double* __restrict ut, const double* __restrict x,
                      const double* __restrict h, double* __restrict gates) {
  const std::size_t H = p.hidden;
  const std::size_t G = 4 * H;
  std::copy_n(p.bias.value.data.data(), G, gates);
  for (std::size_t k = 0; k < p.in; ++k) {
    const double xk = x[k];
    const double* col = wt + k * G;
    for (std::size_t r = 0; r < G; ++r) gates[r] += col[r] * xk;
  }
  for (std::size_t k = 0; k < H; ++k) {
    const double hk = h[k];
    const double* col = ut + k * G;
    for (std::size_t r = 0; r < G; ++r) gates[r] += col[r] * hk;
  }
  for (std::size_t j = 0; j < H; ++j) {
    gates[kInputGate * H + j] = sigmoid(gates[kInputGate * H + j]);
    gates[kForgetGate * H + j] = sigmoid(gates[kForgetGate * H + j]);
    gates[kCellGate * H + j] = std::tanh(gates[kCellGate * H + j]);
    gates[kOutputGate * H + j] = sigmoid(gates[kOutputGate * H + j]);
  }
}

void check_cell_shapes(const LstmCellParams& p, std::size_t x, std::size_t h, std::size_t c) {
  if (x != p.in || h != p.hidden || c != p.hidden) {
    throw Error(Errc::ShapeMismatch,
                fmt::format("{}: cell expects in={} hidden={}, got x={} h={} c={}",
                            p.w_input.name, p.in, p.hidden, x, h, c));
  }
}

}  // namespace

LstmState lstm_cell_step(const LstmCellParams& p, std::span<const double> x,
                         std::span<const double> h_prev, std::span<const double> c_prev) {
  check_cell_shapes(p, x.size(), h_prev.size(), c_prev.size());
  const std::size_t H = p.hidden;
  std::vector<double> gates(4 * H);
  compute_gates(p, x.data(), h_prev.data(), gates.data());
  LstmState s{std::vector<double>(H), std::vector<double>(H)};
  for (std::size_t j = 0; j < H; ++j) {
    s.c[j] = gates[kForgetGate * H + j] * c_prev[j] +
             gates[kInputGate * H + j] * gates[kCellGate * H + j];
    s.h[j] = gates[kOutputGate * H + j] * std::tanh(s.c[j]);
  }
  return s;
}

void lstm_sequence_forward(const LstmCellParams& p, std::span<const double> xs,
                           std::size_t steps, bool reverse, LstmTrace& trace) {
  const std::size_t H = p.hidden;
  const std::size_t I = p.in;
  if (steps == 0 || xs.size() != steps * I) {
    throw Error(Errc::ShapeMismatch,
                fmt::format("{}: sequence of {} values is not {} x {}", p.w_input.name,
                            xs.size(), steps, I));
  }
  trace.steps = steps;
  trace.reverse = reverse;
  trace.x.resize(steps * I);
  trace.h.assign((steps + 1) * H, 0.0);
  trace.c.assign((steps + 1) * H, 0.0);
  trace.gates.resize(steps * 4 * H);
  trace.tanh_c.resize(steps * H);
  const std::size_t G = 4 * H;
  // Column-major copies turn each gate pre-activation into axpys over the gate
  // index, which vectorize; a per-row dot product is a reduction and does not.
  thread_local std::vector<double> wt, ut;
  wt.resize(I * G);
  ut.resize(H * G);
  for (std::size_t r = 0; r < G; ++r) {
    for (std::size_t k = 0; k < I; ++k) wt[k * G + r] = p.w_input.value.data[r * I + k];
    for (std::size_t k = 0; k < H; ++k) ut[k * G + r] = p.w_recurrent.value.data[r * H + k];
  }
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    std::copy_n(xs.data() + t * I, I, trace.x.data() + k * I);
    double* g = trace.gates.data() + k * G;
    gates_transposed(p, wt.data(), ut.data(), trace.x.data() + k * I, trace.h.data() + k * H, g);
    const double* c_prev = trace.c.data() + k * H;
    double* c = trace.c.data() + (k + 1) * H;
    double* h = trace.h.data() + (k + 1) * H;
    double* tc = trace.tanh_c.data() + k * H;
    for (std::size_t j = 0; j < H; ++j) {
      c[j] = g[kForgetGate * H + j] * c_prev[j] + g[kInputGate * H + j] * g[kCellGate * H + j];
      tc[j] = std::tanh(c[j]);
      h[j] = g[kOutputGate * H + j] * tc[j];
    }
  }
}

std::span<const double> lstm_output_at(const LstmTrace& trace, std::size_t hidden,
                                       std::size_t t) {
  const std::size_t k = trace.reverse ? trace.steps - 1 - t : t;
  return std::span<const double>(trace.h).subspan((k + 1) * hidden, hidden);
}

void lstm_sequence_backward(LstmCellParams& p, const LstmTrace& trace,
                            std::span<const double> d_h, std::span<double> d_xs) {
  const std::size_t H = p.hidden;
  const std::size_t I = p.in;
  const std::size_t T = trace.steps;
  if (T == 0) throw Error(Errc::NoForwardRecorded, p.w_input.name + ": empty trace");
  if (d_h.size() != T * H || (!d_xs.empty() && d_xs.size() != T * I)) {
    throw Error(Errc::ShapeMismatch, p.w_input.name + ": backward shape mismatch");
  }
  const double* w = p.w_input.value.data.data();
  const double* u = p.w_recurrent.value.data.data();
  double* gw = p.w_input.grad.data.data();
  double* gu = p.w_recurrent.grad.data.data();
  double* gb = p.bias.grad.data.data();

  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dpre(4 * H), dh(H);
  for (std::size_t kk = T; kk-- > 0;) {
    const std::size_t t = trace.reverse ? T - 1 - kk : kk;
    const double* g = trace.gates.data() + kk * 4 * H;
    const double* tc = trace.tanh_c.data() + kk * H;
    const double* c_prev = trace.c.data() + kk * H;
    const double* h_prev = trace.h.data() + kk * H;
    const double* x = trace.x.data() + kk * I;
    for (std::size_t j = 0; j < H; ++j) {
      dh[j] = d_h[t * H + j] + dh_next[j];
      const double i_g = g[kInputGate * H + j];
      const double f_g = g[kForgetGate * H + j];
      const double c_g = g[kCellGate * H + j];
      const double o_g = g[kOutputGate * H + j];
      const double dc = dc_next[j] + dh[j] * o_g * (1.0 - tc[j] * tc[j]);
      dpre[kInputGate * H + j] = dc * c_g * i_g * (1.0 - i_g);
      dpre[kForgetGate * H + j] = dc * c_prev[j] * f_g * (1.0 - f_g);
      dpre[kCellGate * H + j] = dc * i_g * (1.0 - c_g * c_g);
      dpre[kOutputGate * H + j] = dh[j] * tc[j] * o_g * (1.0 - o_g);
      dc_next[j] = dc * f_g;
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    double* dx = d_xs.empty() ? nullptr : d_xs.data() + t * I;
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double d = dpre[r];
      gb[r] += d;
      double* gwr = gw + r * I;
      const double* wr = w + r * I;
      for (std::size_t k = 0; k < I; ++k) gwr[k] += d * x[k];
      if (dx) {
        for (std::size_t k = 0; k < I; ++k) dx[k] += d * wr[k];
      }
      double* gur = gu + r * H;
      const double* ur = u + r * H;
      for (std::size_t k = 0; k < H; ++k) {
        gur[k] += d * h_prev[k];
        dh_next[k] += d * ur[k];
      }
    }
  }
}

BiLstmLayer::BiLstmLayer(std::string name, std::size_t in, std::size_t hidden,
                         bool return_sequences)
    : forward_cell(name + ".fwd", in, hidden),
      backward_cell(name + ".bwd", in, hidden),
      return_sequences_(return_sequences) {}

std::size_t BiLstmLayer::output_size(std::size_t steps) const noexcept {
  return return_sequences_ ? steps * 2 * hidden() : 2 * hidden();
}

void BiLstmLayer::init(Rng& rng) {
  forward_cell.init(rng);
  backward_cell.init(rng);
}

void BiLstmLayer::forward(std::span<const double> xs, std::size_t steps, Trace& trace,
                          std::span<double> out) const {
  if (out.size() != output_size(steps)) {
    throw Error(Errc::ShapeMismatch, forward_cell.w_input.name + ": output buffer size");
  }
  lstm_sequence_forward(forward_cell, xs, steps, false, trace.fwd);
  lstm_sequence_forward(backward_cell, xs, steps, true, trace.bwd);
  const std::size_t H = hidden();
  if (return_sequences_) {
    for (std::size_t t = 0; t < steps; ++t) {
      auto hf = lstm_output_at(trace.fwd, H, t);
      auto hb = lstm_output_at(trace.bwd, H, t);
      std::copy(hf.begin(), hf.end(), out.data() + t * 2 * H);
      std::copy(hb.begin(), hb.end(), out.data() + t * 2 * H + H);
    }
  } else {
    auto hf = lstm_output_at(trace.fwd, H, steps - 1);
    auto hb = lstm_output_at(trace.bwd, H, 0);
    std::copy(hf.begin(), hf.end(), out.data());
    std::copy(hb.begin(), hb.end(), out.data() + H);
  }
}

void BiLstmLayer::backward(const Trace& trace, std::span<const double> d_out,
                           std::span<double> d_xs) {
  const std::size_t T = trace.fwd.steps;
  const std::size_t H = hidden();
  if (T == 0) throw Error(Errc::NoForwardRecorded, forward_cell.w_input.name);
  if (d_out.size() != output_size(T)) {
    throw Error(Errc::ShapeMismatch, forward_cell.w_input.name + ": gradient size");
  }
  std::vector<double> dh_f(T * H, 0.0), dh_b(T * H, 0.0);
  if (return_sequences_) {
    for (std::size_t t = 0; t < T; ++t) {
      std::copy_n(d_out.data() + t * 2 * H, H, dh_f.data() + t * H);
      std::copy_n(d_out.data() + t * 2 * H + H, H, dh_b.data() + t * H);
    }
  } else {
    std::copy_n(d_out.data(), H, dh_f.data() + (T - 1) * H);
    std::copy_n(d_out.data() + H, H, dh_b.data());
  }
  if (!d_xs.empty()) std::fill(d_xs.begin(), d_xs.end(), 0.0);
  lstm_sequence_backward(forward_cell, trace.fwd, dh_f, d_xs);
  lstm_sequence_backward(backward_cell, trace.bwd, dh_b, d_xs);
}

void BiLstmLayer::collect(ParamList& out) {
  forward_cell.collect(out);
  backward_cell.collect(out);
}

std::vector<double> bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                   std::span<const double> seq, std::size_t steps) {
  if (fwd.in != bwd.in || fwd.hidden != bwd.hidden) {
    throw Error(Errc::ShapeMismatch, "forward/backward cells disagree on shape");
  }
  LstmTrace tf, tb;
  lstm_sequence_forward(fwd, seq, steps, false, tf);
  lstm_sequence_forward(bwd, seq, steps, true, tb);
  const std::size_t H = fwd.hidden;
  std::vector<double> out(steps * 2 * H);
  for (std::size_t t = 0; t < steps; ++t) {
    auto hf = lstm_output_at(tf, H, t);
    auto hb = lstm_output_at(tb, H, t);
    std::copy(hf.begin(), hf.end(), out.data() + t * 2 * H);
    std::copy(hb.begin(), hb.end(), out.data() + t * 2 * H + H);
  }
  return out;
}

}  // namespace affect::nn
