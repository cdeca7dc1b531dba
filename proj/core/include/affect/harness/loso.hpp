#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affect/dataset.hpp"
#include "affect/harness/metrics.hpp"
#include "affect/models/backbone.hpp"
#include "affect/models/train_config.hpp"
#include "affect/nn/tensor.hpp"

namespace affect::eval {

enum class ModelKind {
  Supervised,
  Sgan,
  /// Supervised trainer restricted to the labeled subset SGAN would see.
  SupervisedLabeledOnly,
};

std::string_view model_kind_name(ModelKind kind) noexcept;
/// "supervised", "sgan", "supervised-labeled"; throws InvalidArgument otherwise.
ModelKind parse_model_kind(std::string_view name);

/// Seed of the (repeat, fold) cell.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t repeat, std::size_t fold) noexcept;

struct CellKey {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  auto operator<=>(const CellKey&) const = default;
};

/// Everything a finished cell hands back to the caller.
struct CellOutcome {
  CellKey key;
  MetricsReport report;
  /// Training log as CSV: `epoch,loss` or `epoch,c_loss,d_loss_real,d_loss_fake,g_loss`.
  std::string training_log;
  /// Parameters of the trained model, valid only during the callback.
  nn::ParamList params;
};

struct LosoOptions {
  ModelKind kind = ModelKind::Supervised;
  models::TrainConfig train;
  models::NetShape shape;
  data::FoldOptions fold;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// Cells already finished by an earlier run (their reports go in `prior`).
  std::set<CellKey> skip;
  std::vector<MetricsReport> prior;
  /// Called once per completed cell, serialized under a lock.
  std::function<void(const CellOutcome&)> on_cell;
};

struct LosoResult {
  std::vector<MetricsReport> reports;  // repeat-major, fold-minor
  AggregateTable table;
};

/// Trains and evaluates one (repeat, fold) cell.
CellOutcome run_cell(std::span<const data::SubjectSequences> subjects, const LosoOptions& opts,
                     CellKey key);

/// Every (repeat, fold) cell, `jobs` at a time. Results do not depend on jobs.
LosoResult run_loso(std::span<const data::SubjectSequences> subjects, const LosoOptions& opts);

}  // namespace affect::eval
