#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "affect/error.hpp"
#include "affect/harness/metrics.hpp"
#include "affect/harness/report.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace affect;
using namespace affect::eval;

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

struct Scored {
  std::vector<double> scores;
  std::vector<int> labels;
};

Scored random_scored(std::mt19937_64& rng, std::size_t n, bool coarse) {
  Scored s;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse scores force plenty of ties.
    s.scores.push_back(coarse ? double(rng() % 7) / 6.0 : u(rng));
    s.labels.push_back(int(rng() % 2));
  }
  s.labels[0] = 1;
  s.labels[1] = 0;
  return s;
}

}  // namespace

TEST(Confusion, HandTally) {
  const std::vector<double> p{0.9, 0.2, 0.6, 0.4};
  const std::vector<int> y{1, 0, 0, 1};
  EXPECT_EQ(confusion(p, y), (Confusion{1, 1, 1, 1}));
}

TEST(Confusion, AllCorrect) {
  const std::vector<double> p{0.9, 0.1, 0.7};
  const std::vector<int> y{1, 0, 1};
  const auto c = confusion(p, y);
  EXPECT_EQ(c.fp, 0u);
  EXPECT_EQ(c.fn, 0u);
}

TEST(Confusion, HalfCountsPositive) {
  const std::vector<double> p{0.5};
  const std::vector<int> y{0};
  EXPECT_EQ(confusion(p, y).fp, 1u);
}

TEST(Confusion, LengthMismatch) {
  const std::vector<double> p{0.5, 0.1};
  const std::vector<int> y{0};
  EXPECT_EQ(code_of([&] { confusion(p, y); }), Errc::LengthMismatch);
  EXPECT_EQ(code_of([&] { confusion({}, {}); }), Errc::LengthMismatch);
}

TEST(PrecisionRecall, HandArithmetic) {
  const auto r = precision_recall_f1(Confusion{8, 5, 2, 2});
  EXPECT_NEAR(r.precision, 0.8, 1e-15);
  EXPECT_NEAR(r.recall, 0.8, 1e-15);
  EXPECT_NEAR(r.f1, 0.8, 1e-15);
  EXPECT_FALSE(r.degenerate());
}

TEST(PrecisionRecall, NoPositivePredictions) {
  const auto r = precision_recall_f1(Confusion{0, 5, 0, 3});
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_TRUE(r.precision_degenerate);
  EXPECT_TRUE(r.f1_degenerate);
}

TEST(PrecisionRecall, Perfect) {
  const auto r = precision_recall_f1(Confusion{4, 4, 0, 0});
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Auc, PerfectSeparation) {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_EQ(auc(s, y), 1.0);
}

TEST(Auc, AllTied) {
  const std::vector<double> s(6, 0.3);
  const std::vector<int> y{0, 1, 0, 1, 1, 0};
  EXPECT_EQ(auc(s, y), 0.5);
}

TEST(Auc, HandExample) {
  const std::vector<double> s{0.8, 0.7, 0.3};
  const std::vector<int> y{1, 0, 1};
  EXPECT_EQ(auc(s, y), 0.5);
}

TEST(Auc, SingleClass) {
  const std::vector<double> s{0.8, 0.7};
  const std::vector<int> y{1, 1};
  EXPECT_EQ(code_of([&] { auc(s, y); }), Errc::SingleClass);
}

TEST(Auc, EqualsBruteForceExactly) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_scored(rng, 2 + rng() % 999, trial % 2 == 0);
    EXPECT_EQ(auc(s.scores, s.labels), fixture::brute_force_auc(s.scores, s.labels));
  }
}

TEST(Auc, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_scored(rng, 2 + rng() % 500, trial % 3 == 0);
    const double base = auc(s.scores, s.labels);
    auto ex = s.scores, scaled = s.scores;
    for (double& v : ex) v = std::exp(v);
    for (double& v : scaled) v *= 1000.0;
    EXPECT_EQ(auc(ex, s.labels), base);
    EXPECT_EQ(auc(scaled, s.labels), base);
  }
}

TEST(Evaluate, IdentitiesHold) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scored(rng, 2 + rng() % 300, false);
    const auto r = evaluate("S2", 0, s.scores, s.labels);
    EXPECT_EQ(r.tp + r.tn + r.fp + r.fn, s.scores.size());
    EXPECT_NEAR(r.accuracy, double(r.tp + r.tn) / double(s.scores.size()), 1e-12);
    if (!r.degenerate_prf) {
      EXPECT_NEAR(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall), 1e-12);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      const double p = std::clamp(s.scores[i], 1e-7, 1 - 1e-7);
      loss -= s.labels[i] ? std::log(p) : std::log(1 - p);
    }
    EXPECT_NEAR(r.loss, loss / double(s.scores.size()), 1e-12);
  }
}

TEST(Evaluate, FlagsCollapseAndUndefinedAuc) {
  const std::vector<double> p{0.9, 0.8, 0.7};
  const std::vector<int> y{1, 1, 1};
  const auto r = evaluate("S3", 2, p, y);
  EXPECT_TRUE(r.collapsed);
  EXPECT_TRUE(r.auc_undefined);
  EXPECT_TRUE(std::isnan(r.auc));
  EXPECT_TRUE(r.flagged());
  EXPECT_EQ(r.repeat_idx, 2u);
}

TEST(Aggregate, MeansPerSubjectThenOverall) {
  std::vector<MetricsReport> reports(4);
  reports[0].subject_id = "S2";
  reports[0].accuracy = 0.5;
  reports[0].auc = 0.6;
  reports[1].subject_id = "S2";
  reports[1].repeat_idx = 1;
  reports[1].accuracy = 1.0;
  reports[1].auc = NAN;
  reports[1].auc_undefined = true;
  reports[2].subject_id = "S3";
  reports[2].accuracy = 0.25;
  reports[2].auc = 0.9;
  reports[2].tp = 4;
  reports[3].subject_id = "S3";
  reports[3].repeat_idx = 1;
  reports[3].accuracy = 0.75;
  reports[3].auc = 0.7;
  reports[3].tp = 2;
  const auto t = aggregate(reports);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.repeats, 2u);
  EXPECT_EQ(t.rows[0].subject, "S2");
  EXPECT_EQ(t.rows[0].accuracy, 0.75);
  EXPECT_EQ(t.rows[0].auc, 0.6);
  EXPECT_EQ(t.rows[0].flagged, 1u);
  EXPECT_EQ(t.rows[1].accuracy, 0.5);
  EXPECT_NEAR(t.rows[1].auc, 0.8, 1e-15);
  EXPECT_EQ(t.rows[1].tp, 3.0);
  EXPECT_EQ(t.mean.subject, "MEAN");
  EXPECT_EQ(t.mean.accuracy, 0.625);
  EXPECT_NEAR(t.mean.auc, 0.7, 1e-15);
  EXPECT_EQ(t.mean.reports, 4u);
}

TEST(Report, CsvShape) {
  std::vector<MetricsReport> reports(3);
  for (std::size_t i = 0; i < 3; ++i) reports[i].subject_id = "S" + std::to_string(i + 2);
  const auto csv = format_report_csv(aggregate(reports), {{"model", "sgan"}, {"labeled_fraction", "0.3"}});
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines[0], "# model=sgan");
  EXPECT_EQ(lines[1], "# labeled_fraction=0.3");
  std::size_t header = 0;
  while (header < lines.size() && lines[header].starts_with("#")) ++header;
  EXPECT_EQ(lines[header], kReportHeader);
  ASSERT_EQ(lines.size(), header + 1 + 3 + 1);
  EXPECT_TRUE(lines.back().starts_with("MEAN,"));
  for (std::size_t i = header; i < lines.size(); ++i) {
    EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 10) << lines[i];
  }
}

TEST(Report, CellRowsRoundTripAndSkipTruncatedLine) {
  MetricsReport r;
  r.subject_id = "S9";
  r.repeat_idx = 3;
  r.loss = 0.123456789012345;
  r.accuracy = 0.75;
  r.auc = NAN;
  r.auc_undefined = true;
  r.tp = 3;
  r.fn = 1;
  r.precision = 1.0;
  r.recall = 0.75;
  r.f1 = 6.0 / 7.0;
  const auto path = fixture::scratch_dir("cells") / "cells.csv";
  {
    std::ofstream out(path);
    out << kCellHeader << '\n' << format_cell_row(r) << '\n' << "4,S10,0.5";
  }
  const auto rows = read_cell_rows(path);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].subject_id, "S9");
  EXPECT_EQ(rows[0].repeat_idx, 3u);
  EXPECT_EQ(rows[0].loss, r.loss);
  EXPECT_EQ(rows[0].f1, r.f1);
  EXPECT_TRUE(std::isnan(rows[0].auc));
  EXPECT_TRUE(rows[0].auc_undefined);
  EXPECT_EQ(rows[0].tp, 3u);
}
