#pragma once

// Experiment configuration: a flat `key = value` file merged with
// command-line overrides. Keys accept '-' or '_' interchangeably.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affect/dataset.hpp"
#include "affect/featureize.hpp"
#include "affect/harness/loso.hpp"
#include "affect/models/backbone.hpp"
#include "affect/models/train_config.hpp"

namespace affect::cli {

using ConfigValues = std::map<std::string, std::string>;

struct ConfigKey {
  std::string_view name;  // canonical, underscores
  std::string_view help;
};

/// Every key a config file or flag may set.
const std::vector<ConfigKey>& config_keys();

/// "labeled-fraction" -> "labeled_fraction".
std::string canonical_key(std::string_view key);

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed lines throw InvalidArgument; a missing file throws IoError.
ConfigValues read_config_file(const std::filesystem::path& path);

/// Parses `text` the same way (used by read_config_file).
ConfigValues parse_config(std::string_view text, std::string_view origin = "<config>");

struct ExperimentConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir;  // empty: <output_dir>/cache
  eval::ModelKind model = eval::ModelKind::Supervised;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::size_t jobs = 1;
  std::size_t subjects = 0;  // 0: every subject under dataset_root
  features::WindowSpec window;
  data::SequenceOptions sequence;
  data::FoldOptions fold;
  models::NetShape shape;
  models::TrainConfig train;

  std::filesystem::path effective_cache_dir() const {
    return cache_dir.empty() ? output_dir / "cache" : cache_dir;
  }
};

/// Defaults, then `values`. The seed default comes from AFFECT_SSL_SEED when
/// set. Throws InvalidArgument on unparsable or out-of-range values.
ExperimentConfig resolve_config(const ConfigValues& values);

/// Stable text rendering of every field, used for hashing and metadata.
std::string describe(const ExperimentConfig& cfg);

/// 64-bit FNV-1a, rendered as 16 hex digits by hex_digest.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) noexcept;
std::string hex_digest(std::uint64_t h);

}  // namespace affect::cli
