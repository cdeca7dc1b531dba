#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "affect/error.hpp"
#include "affect/nn/adam.hpp"
#include "affect/nn/checkpoint.hpp"
#include "affect/nn/gradcheck.hpp"
#include "affect/nn/layers.hpp"
#include "affect/nn/lstm.hpp"
#include "fixtures.hpp"

using namespace affect;
using namespace affect::nn;

namespace {

template <class F>
Errc code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no affect::Error thrown";
  return Errc::InvalidArgument;
}

std::vector<double> randn(std::size_t n, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> out(n);
  for (double& v : out) v = d(rng);
  return out;
}

void fill_random(Param& p, Rng& rng, double sd = 0.5) {
  std::normal_distribution<double> d(0.0, sd);
  for (double& v : p.value.data) v = d(rng);
}

}  // namespace

TEST(Activations, Sigmoid) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(2.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-16);
  EXPECT_NEAR(sigmoid(-2.0), 1.0 / (1.0 + std::exp(2.0)), 1e-16);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Activations, SoftmaxUniform) {
  const std::vector<double> z{0, 0, 0};
  for (double p : softmax(z)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-16);
}

TEST(Activations, SoftmaxLargeLogitsStable) {
  const std::vector<double> z{1000.0, 1000.0 + std::log(3.0)};
  const auto p = softmax(z);
  EXPECT_NEAR(p[0], 0.25, 1e-12);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
}

TEST(Loss, BceHalf) { EXPECT_NEAR(bce_loss(0.5, 1), std::log(2.0), 1e-15); }

TEST(Loss, BceNearOne) { EXPECT_NEAR(bce_loss(1.0 - 1e-7, 1), 1e-7, 1e-12); }

TEST(Loss, BceClampedAtExtremes) {
  EXPECT_TRUE(std::isfinite(bce_loss(0.0, 1)));
  EXPECT_NEAR(bce_loss(0.0, 1), -std::log(kProbClamp), 1e-9);
  EXPECT_NEAR(bce_loss(1.0, 0), -std::log(kProbClamp), 1e-6);
}

TEST(Loss, BceLogitGradientIsPMinusY) {
  for (double z : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
    for (int y : {0, 1}) {
      const auto lg = bce_with_logit(z, y);
      EXPECT_EQ(lg.d_logit, sigmoid(z) - y);
      const double h = 1e-5;
      const double fd =
          (bce_with_logit(z + h, y).loss - bce_with_logit(z - h, y).loss) / (2.0 * h);
      EXPECT_NEAR(lg.d_logit, fd, 1e-8);
    }
  }
}

TEST(Loss, SoftmaxCeMatchesDirectFormula) {
  const std::vector<double> z{0.3, -1.2};
  const double direct = -std::log(std::exp(-1.2) / (std::exp(0.3) + std::exp(-1.2)));
  EXPECT_NEAR(softmax_ce_loss(z, 1), direct, 1e-14);
  const auto g = softmax_ce_grad(z, 1);
  const auto p = softmax(z);
  EXPECT_NEAR(g[0], p[0], 1e-15);
  EXPECT_NEAR(g[1], p[1] - 1.0, 1e-15);
  EXPECT_EQ(code_of([&] { softmax_ce_loss(z, 2); }), Errc::ShapeMismatch);
}

TEST(Dense, ForwardIsAffine) {
  DenseLayer d("d", 2, 2);
  d.weight.value.data = {1, 2, 3, 4};
  d.bias.value.data = {0.5, -0.5};
  const std::vector<double> x{1, -1};
  std::vector<double> y(2);
  d.forward(x, y);
  EXPECT_EQ(y, (std::vector<double>{-0.5, -1.5}));
}

TEST(Dropout, EvalIsIdentity) {
  Rng rng(1);
  const std::vector<double> x{1, 2, 3};
  EXPECT_EQ(dropout_forward(x, 0.5, Mode::Eval, rng), x);
}

TEST(Dropout, ZeroRateIsIdentity) {
  Rng rng(1);
  const std::vector<double> x{1, 2, 3};
  EXPECT_EQ(dropout_forward(x, 0.0, Mode::Train, rng), x);
}

TEST(Dropout, TrainExpectationMatchesInput) {
  Rng rng(77);
  const double p = 0.2;
  const std::size_t n = 40, passes = 10000;
  const std::vector<double> x(n, 1.0);
  std::vector<double> sum(n, 0.0);
  for (std::size_t k = 0; k < passes; ++k) {
    const auto y = dropout_forward(x, p, Mode::Train, rng);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_TRUE(y[i] == 0.0 || std::abs(y[i] - 1.0 / (1.0 - p)) < 1e-15);
      sum[i] += y[i];
    }
  }
  // Each output is (1/(1-p)) * Bernoulli(1-p): variance p/(1-p).
  const double se = std::sqrt(p / (1.0 - p) / double(passes));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(sum[i] / double(passes), 1.0, 4.5 * se);
    total += sum[i];
  }
  EXPECT_NEAR(total / double(n * passes), 1.0, 3.0 * se / std::sqrt(double(n)));
}

TEST(Dropout, RejectsBadRate) {
  Rng rng(1);
  const std::vector<double> x{1};
  EXPECT_EQ(code_of([&] { dropout_forward(x, 1.0, Mode::Train, rng); }), Errc::InvalidArgument);
}

TEST(Lstm, ZeroParamsZeroState) {
  LstmCellParams p("c", 3, 2);
  const std::vector<double> x{1, 2, 3}, h{0, 0}, c{0, 0};
  const auto s = lstm_cell_step(p, x, h, c);
  EXPECT_EQ(s.h, (std::vector<double>{0, 0}));
  EXPECT_EQ(s.c, (std::vector<double>{0, 0}));
}

TEST(Lstm, ZeroParamsCarryHalfCell) {
  LstmCellParams p("c", 3, 2);
  const std::vector<double> x{0, 0, 0}, h{0, 0}, c{2.0, -0.6};
  const auto s = lstm_cell_step(p, x, h, c);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(s.c[j], 0.5 * c[j], 1e-16);
    EXPECT_NEAR(s.h[j], 0.5 * std::tanh(0.5 * c[j]), 1e-16);
  }
}

TEST(Lstm, HandEvaluatedGates) {
  // One unit, one input: gate pre-activations w*x + u*h + b.
  LstmCellParams p("c", 1, 1);
  p.w_input.value.data = {0.1, 0.2, 0.3, 0.4};
  p.w_recurrent.value.data = {-0.1, 0.5, 0.2, -0.3};
  p.bias.value.data = {0.0, 1.0, -0.2, 0.1};
  const double x = 0.7, h = -0.4, c = 0.9;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double i = sig(0.1 * x - 0.1 * h);
  const double f = sig(0.2 * x + 0.5 * h + 1.0);
  const double g = std::tanh(0.3 * x + 0.2 * h - 0.2);
  const double o = sig(0.4 * x - 0.3 * h + 0.1);
  const double c2 = f * c + i * g;
  const std::vector<double> xs{x}, hs{h}, cs{c};
  const auto s = lstm_cell_step(p, xs, hs, cs);
  EXPECT_NEAR(s.c[0], c2, 1e-15);
  EXPECT_NEAR(s.h[0], o * std::tanh(c2), 1e-15);
}

TEST(Lstm, ShapeMismatch) {
  LstmCellParams p("c", 3, 2);
  const std::vector<double> x{0, 0, 0}, h{0, 0, 0}, c{0, 0};
  EXPECT_EQ(code_of([&] { lstm_cell_step(p, x, h, c); }), Errc::ShapeMismatch);
}

TEST(Lstm, InitForgetBiasOne) {
  LstmCellParams p("c", 4, 3);
  Rng rng(2);
  p.init(rng);
  const double limit_in = std::sqrt(6.0 / (4.0 + 3.0));
  for (std::size_t j = 0; j < 12; ++j) {
    EXPECT_EQ(p.bias.value[j], j / 3 == kForgetGate ? 1.0 : 0.0);
  }
  for (double w : p.w_input.value.data) EXPECT_LE(std::abs(w), limit_in);
}

TEST(BiLstm, PalindromeMirrorsDirections) {
  Rng rng(8);
  LstmCellParams p("c", 3, 4);
  p.init(rng);
  const std::size_t T = 5;
  auto seq = randn(T * 3, rng);
  for (std::size_t t = 0; t < T / 2; ++t) {
    for (std::size_t j = 0; j < 3; ++j) seq[(T - 1 - t) * 3 + j] = seq[t * 3 + j];
  }
  const auto out = bilstm_forward(p, p, seq, T);
  ASSERT_EQ(out.size(), T * 8);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(out[t * 8 + j], out[(T - 1 - t) * 8 + 4 + j]);
    }
  }
}

TEST(BiLstm, SingleStepIsTwoCells) {
  Rng rng(9);
  LstmCellParams f("f", 3, 2), b("b", 3, 2);
  f.init(rng);
  b.init(rng);
  const auto x = randn(3, rng);
  const std::vector<double> zero{0, 0};
  const auto out = bilstm_forward(f, b, x, 1);
  const auto hf = lstm_cell_step(f, x, zero, zero).h;
  const auto hb = lstm_cell_step(b, x, zero, zero).h;
  EXPECT_EQ(out, (std::vector<double>{hf[0], hf[1], hb[0], hb[1]}));
}

TEST(BiLstm, FinalModeTakesLastStateOfEachDirection) {
  Rng rng(10);
  BiLstmLayer seq_layer("s", 3, 2, true);
  seq_layer.init(rng);
  BiLstmLayer fin_layer("s", 3, 2, false);
  fin_layer.forward_cell = seq_layer.forward_cell;
  fin_layer.backward_cell = seq_layer.backward_cell;
  const std::size_t T = 4;
  const auto xs = randn(T * 3, rng);
  BiLstmLayer::Trace tr;
  std::vector<double> all(T * 4), fin(4);
  seq_layer.forward(xs, T, tr, all);
  fin_layer.forward(xs, T, tr, fin);
  EXPECT_EQ(fin[0], all[(T - 1) * 4 + 0]);
  EXPECT_EQ(fin[1], all[(T - 1) * 4 + 1]);
  EXPECT_EQ(fin[2], all[2]);
  EXPECT_EQ(fin[3], all[3]);
}

TEST(BiLstm, BackwardWithoutForward) {
  BiLstmLayer layer("s", 3, 2, true);
  BiLstmLayer::Trace empty;
  std::vector<double> d(8, 0.0);
  EXPECT_EQ(code_of([&] { layer.backward(empty, d, {}); }), Errc::NoForwardRecorded);
}

TEST(Adam, FirstStepIsLrTimesSign) {
  Param p("w", {3});
  p.value.data = {1.0, 1.0, 1.0};
  p.grad.data = {0.3, -20.0, 1e-3};
  AdamConfig cfg;
  adam_step({&p}, cfg);
  // m_hat = g, v_hat = g^2 after bias correction: update = lr * g / (|g| + eps).
  const double g[] = {0.3, -20.0, 1e-3};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(p.value[i], 1.0 - cfg.lr * g[i] / (std::abs(g[i]) + cfg.eps), 1e-15);
  }
  EXPECT_EQ(p.step, 1);
}

TEST(Adam, SecondStepHandComputed) {
  Param p("w", {1});
  p.value.data = {0.0};
  AdamConfig cfg;
  const double g1 = 0.5, g2 = -0.25;
  p.grad.data = {g1};
  adam_step({&p}, cfg);
  p.grad.data = {g2};
  adam_step({&p}, cfg);
  const double m = 0.9 * (0.1 * g1) + 0.1 * g2;
  const double v = 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  const double first = -cfg.lr * g1 / (std::abs(g1) + cfg.eps);
  EXPECT_NEAR(p.value[0], first - cfg.lr * mh / (std::sqrt(vh) + cfg.eps), 1e-15);
}

TEST(Adam, ZeroGradientLeavesValues) {
  Param p("w", {2});
  p.value.data = {0.25, -4.0};
  adam_step({&p}, AdamConfig{});
  EXPECT_EQ(p.value.data, (std::vector<double>{0.25, -4.0}));
}

TEST(Adam, Deterministic) {
  Param a("w", {2}), b("w", {2});
  for (Param* p : {&a, &b}) {
    p->value.data = {1.0, 2.0};
    for (int k = 0; k < 5; ++k) {
      p->grad.data = {0.1 * k, -0.3};
      adam_step({p}, AdamConfig{});
    }
  }
  EXPECT_EQ(a.value.data, b.value.data);
}

TEST(Adam, SharedParamHasOneState) {
  Param p("w", {1});
  p.grad.data = {1.0};
  adam_step({&p}, AdamConfig{});
  adam_step({&p}, AdamConfig{});
  EXPECT_EQ(p.step, 2);
}

TEST(Checkpoint, RoundTrip) {
  Rng rng(4);
  LstmCellParams cell("cell", 3, 2);
  cell.init(rng);
  DenseLayer head("head", 4, 1);
  head.init(rng);
  ParamList params;
  cell.collect(params);
  head.collect(params);
  const auto path = fixture::scratch_dir("ckpt") / "model.ckpt";
  save_checkpoint(params, path);

  const auto headers = read_checkpoint_header(path);
  ASSERT_EQ(headers.size(), params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(headers[i].name, params[i]->name);
    EXPECT_EQ(headers[i].shape, params[i]->value.shape);
  }

  LstmCellParams cell2("cell", 3, 2);
  DenseLayer head2("head", 4, 1);
  ParamList params2;
  cell2.collect(params2);
  head2.collect(params2);
  load_checkpoint(params2, path);
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(params[i]->value.data, params2[i]->value.data);
  }
}

TEST(Checkpoint, ShapeMismatchRejected) {
  DenseLayer a("head", 4, 1), b("head", 5, 1);
  ParamList pa, pb;
  a.collect(pa);
  b.collect(pb);
  const auto path = fixture::scratch_dir("ckpt_bad") / "m.ckpt";
  save_checkpoint(pa, path);
  EXPECT_EQ(code_of([&] { load_checkpoint(pb, path); }), Errc::ShapeMismatch);
}

TEST(Checkpoint, NotACheckpoint) {
  const auto path = fixture::scratch_dir("ckpt_garbage") / "m.ckpt";
  std::ofstream(path) << "hello\n";
  EXPECT_EQ(code_of([&] { read_checkpoint_header(path); }), Errc::ParseError);
}

TEST(GradCheck, DetectsWrongGradient) {
  Param p("w", {2});
  p.value.data = {0.3, -0.2};
  auto loss = [&] { return p.value[0] * p.value[0] + 3.0 * p.value[1]; };
  auto good = [&] {
    p.zero_grad();
    p.grad[0] = 2.0 * p.value[0];
    p.grad[1] = 3.0;
  };
  auto bad = [&] {
    good();
    p.grad[1] = 3.1;
  };
  EXPECT_LT(check_gradients("good", {&p}, loss, good).max_rel_error, 1e-8);
  const auto r = check_gradients("bad", {&p}, loss, bad);
  EXPECT_GT(r.max_rel_error, 1e-2);
  EXPECT_EQ(r.entries_checked, 2u);
}

TEST(GradCheck, LstmSequenceBackward) {
  Rng rng(12);
  LstmCellParams p("c", 3, 2);
  p.init(rng);
  fill_random(p.bias, rng);
  const std::size_t T = 4;
  auto xs = randn(T * 3, rng);
  const auto weights = randn(T * 2, rng);
  for (bool reverse : {false, true}) {
    auto loss = [&] {
      LstmTrace tr;
      lstm_sequence_forward(p, xs, T, reverse, tr);
      double l = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        auto h = lstm_output_at(tr, 2, t);
        for (std::size_t j = 0; j < 2; ++j) l += weights[t * 2 + j] * h[j];
      }
      return l;
    };
    std::vector<double> dx(T * 3);
    auto analytic = [&] {
      ParamList ps;
      p.collect(ps);
      zero_grads(ps);
      LstmTrace tr;
      lstm_sequence_forward(p, xs, T, reverse, tr);
      std::fill(dx.begin(), dx.end(), 0.0);
      lstm_sequence_backward(p, tr, weights, dx);
    };
    ParamList ps;
    p.collect(ps);
    EXPECT_LT(check_gradients("lstm", ps, loss, analytic).max_rel_error, 1e-6);

    // Input gradient against central differences.
    analytic();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double keep = xs[i];
      xs[i] = keep + 1e-5;
      const double up = loss();
      xs[i] = keep - 1e-5;
      const double down = loss();
      xs[i] = keep;
      EXPECT_LT(relative_error(dx[i], (up - down) / 2e-5), 1e-6);
    }
  }
}
