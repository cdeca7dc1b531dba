#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace affect::eval {

inline constexpr double kDecisionThreshold = 0.5;

struct Confusion {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// A prediction is positive iff probability >= threshold.
Confusion confusion(std::span<const double> preds, std::span<const int> labels,
                    double threshold = kDecisionThreshold);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;  // tp + fp == 0
  bool recall_degenerate = false;     // tp + fn == 0
  bool f1_degenerate = false;         // precision + recall == 0

  bool degenerate() const noexcept {
    return precision_degenerate || recall_degenerate || f1_degenerate;
  }
};

/// Zero-denominator cases yield 0 with the matching flag set.
PrecisionRecallF1 precision_recall_f1(const Confusion& c) noexcept;

/// Mann-Whitney AUC: P(score_pos > score_neg) + P(tie)/2, via average ranks.
/// Throws SingleClass if either class is absent.
double auc(std::span<const double> scores, std::span<const int> labels);

struct MetricsReport {
  std::string subject_id;
  std::size_t repeat_idx = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// The model predicted a single class for the whole test set.
  bool collapsed = false;
  /// Test set held one class, so AUC is undefined (stored as NaN).
  bool auc_undefined = false;
  bool degenerate_prf = false;

  bool flagged() const noexcept { return collapsed || auc_undefined || degenerate_prf; }
};

/// Mean clamped BCE as the loss; every other metric from the 0.5 threshold.
MetricsReport evaluate(std::string subject_id, std::size_t repeat_idx,
                       std::span<const double> preds, std::span<const int> labels);

struct AggregateRow {
  std::string subject;
  double loss = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  double tp = 0.0;
  double tn = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t reports = 0;
  std::size_t flagged = 0;
};

struct AggregateTable {
  std::vector<AggregateRow> rows;  // one per subject, first-seen order
  AggregateRow mean;               // unweighted mean over subject rows
  std::size_t repeats = 0;
};

/// Arithmetic means per subject over repeats, then over subjects. NaN AUCs
/// are skipped in the AUC mean.
AggregateTable aggregate(std::span<const MetricsReport> reports);

}  // namespace affect::eval
