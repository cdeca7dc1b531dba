#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Error config_error(std::string_view key, std::string_view value, std::string_view why) {
  return Error(Errc::InvalidArgument, fmt::format("{} = '{}': {}", key, value, why));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) throw config_error(key, text, "not a number");
  return v;
}

std::size_t parse_count(std::string_view key, std::string_view text, std::size_t min) {
  const auto v = parse_number<std::size_t>(key, text);
  if (v < min) throw config_error(key, text, fmt::format("must be at least {}", min));
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw config_error(key, text, "expected on/off");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"dataset_root", "directory holding one sub-directory per subject"},
      {"output_dir", "where reports, logs and checkpoints go"},
      {"cache_dir", "prepared-data cache (default <output_dir>/cache)"},
      {"model", "supervised, sgan or supervised-labeled"},
      {"seed", "base seed (default $AFFECT_SSL_SEED or 0)"},
      {"repeats", "LOSO repeats"},
      {"jobs", "parallel (repeat, fold) cells"},
      {"subjects", "use only the first N subjects (0 = all)"},
      {"window_length", "window length in label samples"},
      {"window_step", "window step in label samples"},
      {"seq_steps", "frames per sequence"},
      {"min_coverage", "minimum majority-label coverage of a frame"},
      {"rebalance", "subsample training classes to 1:1 (on/off)"},
      {"standardize", "z-score with training statistics (on/off)"},
      {"epochs", "training epochs (default 15 supervised, 30 sgan)"},
      {"batch_size", "mini-batch size"},
      {"lr", "Adam learning rate"},
      {"labeled_fraction", "fraction of training labels visible to sgan"},
      {"latent_dim", "generator latent size"},
      {"generator_hidden", "generator hidden width"},
      {"hidden", "LSTM units per direction"},
      {"dropout", "dropout rate"},
  };
  return keys;
}

std::string canonical_key(std::string_view key) {
  std::string out(trim(key));
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

ConfigValues parse_config(std::string_view text, std::string_view origin) {
  ConfigValues values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::InvalidArgument, fmt::format("{}:{}: expected key = value", origin, line_no));
    }
    const auto key = canonical_key(line.substr(0, eq));
    const auto& keys = config_keys();
    if (std::none_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; })) {
      throw Error(Errc::InvalidArgument, fmt::format("{}:{}: unknown key '{}'", origin, line_no, key));
    }
    values[key] = std::string(trim(line.substr(eq + 1)));
  }
  return values;
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

ExperimentConfig resolve_config(const ConfigValues& values) {
  ExperimentConfig cfg;
  if (const char* env = std::getenv("AFFECT_SSL_SEED"); env && *env) {
    cfg.seed = parse_number<std::uint64_t>("AFFECT_SSL_SEED", env);
  }
  std::optional<std::size_t> epochs;
  for (const auto& [key, value] : values) {
    const std::string_view v = value;
    if (key == "dataset_root") cfg.dataset_root = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "cache_dir") cfg.cache_dir = value;
    else if (key == "model") {
      try {
        cfg.model = eval::parse_model_kind(v);
      } catch (const Error&) {
        throw config_error(key, v, "expected supervised, sgan or supervised-labeled");
      }
    } else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "repeats") cfg.repeats = parse_count(key, v, 1);
    else if (key == "jobs") cfg.jobs = parse_count(key, v, 1);
    else if (key == "subjects") cfg.subjects = parse_count(key, v, 0);
    else if (key == "window_length") cfg.window.length_label_samples = std::int64_t(parse_count(key, v, 1));
    else if (key == "window_step") cfg.window.step_label_samples = std::int64_t(parse_count(key, v, 1));
    else if (key == "seq_steps") cfg.sequence.steps = parse_count(key, v, 1);
    else if (key == "min_coverage") cfg.sequence.min_coverage = parse_number<double>(key, v);
    else if (key == "rebalance") cfg.fold.rebalance_train = parse_bool(key, v);
    else if (key == "standardize") cfg.fold.standardize = parse_bool(key, v);
    else if (key == "epochs") epochs = parse_count(key, v, 0);
    else if (key == "batch_size") cfg.train.batch_size = parse_count(key, v, 1);
    else if (key == "lr") cfg.train.lr = parse_number<double>(key, v);
    else if (key == "labeled_fraction") cfg.train.labeled_fraction = parse_number<double>(key, v);
    else if (key == "latent_dim") cfg.train.latent_dim = parse_count(key, v, 1);
    else if (key == "generator_hidden") cfg.train.generator_hidden = parse_count(key, v, 1);
    else if (key == "hidden") cfg.shape.hidden = parse_count(key, v, 1);
    else if (key == "dropout") cfg.shape.dropout = parse_number<double>(key, v);
    else throw config_error(key, v, "unknown key");
  }
  cfg.train.epochs = epochs.value_or(cfg.model == eval::ModelKind::Sgan
                                         ? models::TrainConfig::sgan_defaults().epochs
                                         : models::TrainConfig::supervised_defaults().epochs);
  cfg.shape.steps = cfg.sequence.steps;
  cfg.shape.features = features::kFeatureCount;

  cfg.window.validate();
  if (!(cfg.sequence.min_coverage >= 0.0 && cfg.sequence.min_coverage <= 1.0)) {
    throw config_error("min_coverage", fmt::format("{}", cfg.sequence.min_coverage), "outside [0, 1]");
  }
  if (!(cfg.shape.dropout >= 0.0 && cfg.shape.dropout < 1.0)) {
    throw config_error("dropout", fmt::format("{}", cfg.shape.dropout), "outside [0, 1)");
  }
  cfg.train.validate();
  return cfg;
}

std::string describe(const ExperimentConfig& c) {
  return fmt::format(
      "model={} seed={} repeats={} subjects={} window_length={} window_step={} seq_steps={} "
      "min_coverage={} rebalance={} standardize={} epochs={} batch_size={} lr={} "
      "labeled_fraction={} latent_dim={} generator_hidden={} hidden={} dropout={}",
      eval::model_kind_name(c.model), c.seed, c.repeats, c.subjects, c.window.length_label_samples,
      c.window.step_label_samples, c.sequence.steps, c.sequence.min_coverage,
      c.fold.rebalance_train ? "on" : "off", c.fold.standardize ? "on" : "off", c.train.epochs,
      c.train.batch_size, c.train.lr, c.train.labeled_fraction, c.train.latent_dim,
      c.train.generator_hidden, c.shape.hidden, c.shape.dropout);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) noexcept {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace affect::cli
