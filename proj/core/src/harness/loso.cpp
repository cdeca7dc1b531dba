#include "affect/harness/loso.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "affect/error.hpp"
#include "affect/models/sgan.hpp"
#include "affect/models/supervised.hpp"

namespace affect::eval {

std::string_view model_kind_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Supervised: return "supervised";
    case ModelKind::Sgan: return "sgan";
    case ModelKind::SupervisedLabeledOnly: return "supervised-labeled";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "supervised") return ModelKind::Supervised;
  if (name == "sgan") return ModelKind::Sgan;
  if (name == "supervised-labeled") return ModelKind::SupervisedLabeledOnly;
  throw Error(Errc::InvalidArgument, fmt::format("unknown model '{}'", name));
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t repeat, std::size_t fold) noexcept {
  return data::mix_seed(data::mix_seed(seed, repeat), fold);
}

namespace {

std::vector<int> labels_of(std::span<const data::SequenceSample> samples) {
  std::vector<int> y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(s.label);
  return y;
}

void finish(CellOutcome& out, const LosoOptions& opts, nn::ParamList params) {
  out.params = std::move(params);
  if (opts.on_cell) opts.on_cell(out);
  out.params.clear();
}

void run_supervised(CellOutcome& out, const LosoOptions& opts, const data::FoldDataset& fold,
                    std::span<const data::SequenceSample> train, const models::TrainConfig& cfg,
                    nn::Rng& init_rng) {
  models::SupervisedNet net(opts.shape);
  net.init(init_rng);
  const auto trace = models::train_supervised(net, train, cfg);
  const auto preds = net.predict(fold.test);
  out.training_log = "epoch,loss\n";
  for (std::size_t e = 0; e < trace.epoch_loss.size(); ++e) {
    out.training_log += fmt::format("{},{}\n", e + 1, trace.epoch_loss[e]);
  }
  out.report = evaluate(fold.test_subject, out.key.repeat, preds, labels_of(fold.test));
  finish(out, opts, net.params());
}

}  // namespace

CellOutcome run_cell(std::span<const data::SubjectSequences> subjects, const LosoOptions& opts,
                     CellKey key) {
  const auto seed = cell_seed(opts.seed, key.repeat, key.fold);
  const auto fold = data::build_fold(subjects, key.fold, seed, opts.fold);
  auto cfg = opts.train;
  cfg.seed = data::mix_seed(seed, 2);

  CellOutcome out;
  out.key = key;
  nn::Rng init_rng(data::mix_seed(seed, 3));

  if (opts.kind == ModelKind::Supervised) {
    run_supervised(out, opts, fold, fold.train, cfg, init_rng);
    return out;
  }

  // SGAN and its labeled-only baseline see the same labeled subset.
  const auto split =
      data::split_labeled(fold.train, cfg.labeled_fraction, data::mix_seed(seed, 4));
  if (opts.kind == ModelKind::SupervisedLabeledOnly) {
    std::vector<data::SequenceSample> labeled;
    for (const auto& s : split) {
      if (s.labeled) labeled.push_back(s);
    }
    run_supervised(out, opts, fold, labeled, cfg, init_rng);
    return out;
  }

  models::SganNet net(opts.shape, cfg.latent_dim, cfg.generator_hidden);
  net.init(init_rng);
  const auto trace = models::train_sgan(net, split, cfg);
  const auto preds = net.predict(fold.test);
  out.training_log = "epoch,c_loss,d_loss_real,d_loss_fake,g_loss\n";
  for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
    const auto& l = trace.epochs[e];
    out.training_log +=
        fmt::format("{},{},{},{},{}\n", e + 1, l.c_loss, l.d_loss_real, l.d_loss_fake, l.g_loss);
  }
  out.report = evaluate(fold.test_subject, key.repeat, preds, labels_of(fold.test));
  finish(out, opts, net.all_params());
  return out;
}

LosoResult run_loso(std::span<const data::SubjectSequences> subjects, const LosoOptions& opts) {
  if (subjects.size() < 2) {
    throw Error(Errc::InvalidArgument, "leave-one-subject-out needs at least two subjects");
  }
  if (opts.repeats == 0) throw Error(Errc::InvalidArgument, "repeats must be positive");

  std::vector<CellKey> cells;
  for (std::size_t r = 0; r < opts.repeats; ++r) {
    for (std::size_t f = 0; f < subjects.size(); ++f) cells.push_back({r, f});
  }

  std::map<CellKey, MetricsReport> done;
  for (const auto& rep : opts.prior) {
    for (std::size_t f = 0; f < subjects.size(); ++f) {
      CellKey k{rep.repeat_idx, f};
      if (subjects[f].subject_id == rep.subject_id && opts.skip.count(k)) done[k] = rep;
    }
  }

  std::vector<CellKey> todo;
  for (const auto& k : cells) {
    if (!done.count(k)) todo.push_back(k);
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  LosoOptions worker_opts = opts;
  auto user_cb = opts.on_cell;
  worker_opts.on_cell = [&](const CellOutcome& outcome) {
    std::lock_guard lock(mu);
    if (user_cb) user_cb(outcome);
  };

  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= todo.size()) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        auto outcome = run_cell(subjects, worker_opts, todo[i]);
        std::lock_guard lock(mu);
        done[todo[i]] = std::move(outcome.report);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, todo.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  LosoResult result;
  for (const auto& k : cells) result.reports.push_back(done.at(k));
  result.table = aggregate(result.reports);
  return result;
}

}  // namespace affect::eval
