#include "affect/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "affect/error.hpp"
#include "affect/nn/layers.hpp"

namespace affect::eval {

Confusion confusion(std::span<const double> preds, std::span<const int> labels,
                    double threshold) {
  if (preds.size() != labels.size() || preds.empty()) {
    throw Error(Errc::LengthMismatch,
                fmt::format("{} predictions vs {} labels", preds.size(), labels.size()));
  }
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool positive = preds[i] >= threshold;
    if (labels[i] == 1) {
      ++(positive ? c.tp : c.fn);
    } else {
      ++(positive ? c.fp : c.tn);
    }
  }
  return c;
}

PrecisionRecallF1 precision_recall_f1(const Confusion& c) noexcept {
  PrecisionRecallF1 r;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp == 0) {
    r.precision_degenerate = true;
  } else {
    r.precision = tp / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    r.recall_degenerate = true;
  } else {
    r.recall = tp / static_cast<double>(c.tp + c.fn);
  }
  if (r.precision + r.recall == 0.0) {
    r.f1_degenerate = true;
  } else {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::LengthMismatch,
                fmt::format("{} scores vs {} labels", scores.size(), labels.size()));
  }
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the positives' rank sum, with 1-based ranks averaged over ties, so
  // every quantity stays an exact integer.
  std::int64_t twice_rank_sum = 0;
  std::int64_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const auto lo = static_cast<std::int64_t>(i + 1);
    const auto hi = static_cast<std::int64_t>(j);
    std::int64_t group_pos = 0;
    for (std::size_t k = i; k < j; ++k) group_pos += labels[order[k]] == 1 ? 1 : 0;
    twice_rank_sum += group_pos * (lo + hi);
    positives += group_pos;
    i = j;
  }
  const std::int64_t negatives = static_cast<std::int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(Errc::SingleClass, "AUC needs both classes");
  }
  const std::int64_t twice_u = twice_rank_sum - positives * (positives + 1);
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

MetricsReport evaluate(std::string subject_id, std::size_t repeat_idx,
                       std::span<const double> preds, std::span<const int> labels) {
  MetricsReport r;
  r.subject_id = std::move(subject_id);
  r.repeat_idx = repeat_idx;
  const auto c = confusion(preds, labels);
  r.tp = c.tp;
  r.tn = c.tn;
  r.fp = c.fp;
  r.fn = c.fn;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  const auto prf = precision_recall_f1(c);
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  r.degenerate_prf = prf.degenerate();
  r.collapsed = (c.tp + c.fp == 0) || (c.tn + c.fn == 0);
  double loss = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) loss += nn::bce_loss(preds[i], labels[i]);
  r.loss = loss / static_cast<double>(preds.size());
  try {
    r.auc = auc(preds, labels);
  } catch (const Error& e) {
    if (e.code() != Errc::SingleClass) throw;
    r.auc = std::numeric_limits<double>::quiet_NaN();
    r.auc_undefined = true;
  }
  return r;
}

namespace {

struct RowSums {
  AggregateRow row;
  std::size_t auc_count = 0;

  void add(const MetricsReport& r) {
    row.loss += r.loss;
    row.accuracy += r.accuracy;
    if (!std::isnan(r.auc)) {
      row.auc += r.auc;
      ++auc_count;
    }
    row.tp += static_cast<double>(r.tp);
    row.tn += static_cast<double>(r.tn);
    row.fp += static_cast<double>(r.fp);
    row.fn += static_cast<double>(r.fn);
    row.precision += r.precision;
    row.recall += r.recall;
    row.f1 += r.f1;
    ++row.reports;
    if (r.flagged()) ++row.flagged;
  }

  AggregateRow finish() const {
    AggregateRow out = row;
    const auto n = static_cast<double>(row.reports);
    out.loss /= n;
    out.accuracy /= n;
    out.auc = auc_count ? row.auc / static_cast<double>(auc_count)
                        : std::numeric_limits<double>::quiet_NaN();
    out.tp /= n;
    out.tn /= n;
    out.fp /= n;
    out.fn /= n;
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
    return out;
  }
};

}  // namespace

AggregateTable aggregate(std::span<const MetricsReport> reports) {
  AggregateTable table;
  std::vector<RowSums> sums;
  std::size_t max_repeat = 0;
  for (const auto& r : reports) {
    auto it = std::find_if(sums.begin(), sums.end(),
                           [&](const RowSums& s) { return s.row.subject == r.subject_id; });
    if (it == sums.end()) {
      sums.emplace_back();
      sums.back().row.subject = r.subject_id;
      it = std::prev(sums.end());
    }
    it->add(r);
    max_repeat = std::max(max_repeat, r.repeat_idx + 1);
  }
  table.repeats = max_repeat;
  RowSums overall;
  overall.row.subject = "MEAN";
  std::size_t auc_rows = 0;
  for (const auto& s : sums) {
    auto row = s.finish();
    table.rows.push_back(row);
    overall.row.loss += row.loss;
    overall.row.accuracy += row.accuracy;
    if (!std::isnan(row.auc)) {
      overall.row.auc += row.auc;
      ++auc_rows;
    }
    overall.row.tp += row.tp;
    overall.row.tn += row.tn;
    overall.row.fp += row.fp;
    overall.row.fn += row.fn;
    overall.row.precision += row.precision;
    overall.row.recall += row.recall;
    overall.row.f1 += row.f1;
    overall.row.flagged += row.flagged;
  }
  overall.row.reports = table.rows.size();
  overall.auc_count = auc_rows;
  if (!table.rows.empty()) {
    table.mean = overall.finish();
    table.mean.reports = reports.size();
  } else {
    table.mean.subject = "MEAN";
  }
  return table;
}

}  // namespace affect::eval
