#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace {

using namespace affect;

std::uint64_t default_seed() {
  const char* env = std::getenv("AFFECT_SSL_SEED");
  return env && *env ? std::strtoull(env, nullptr, 10) : 0;
}

// Every config key becomes a --dashed-flag; only the flags actually given
// override the config file.
struct ExperimentFlags {
  std::string config_file;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "flat key = value config file");
    for (const auto& key : cli::config_keys()) {
      std::string flag(key.name);
      std::replace(flag.begin(), flag.end(), '_', '-');
      app->add_option("--" + flag, flags[std::string(key.name)], std::string(key.help));
    }
  }

  cli::ExperimentConfig resolve(const CLI::App* app) const {
    cli::ConfigValues values;
    if (!config_file.empty()) values = cli::read_config_file(config_file);
    for (const auto& [key, value] : flags) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (app->count(flag) > 0) values[key] = value;
    }
    return cli::resolve_config(values);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stress detection from wrist signals: data preparation, supervised and "
               "semi-supervised GAN training, leave-one-subject-out evaluation"};
  app.set_version_flag("--version", "affect-ssl " + cli::version_string());
  app.require_subcommand(1);

  std::string root;
  auto* validate = app.add_subcommand("validate", "check every subject recording");
  validate->add_option("dataset_root", root, "dataset directory")->required();

  std::string summary_out = "summary";
  auto* summarize = app.add_subcommand("summarize", "label counts, sample counts, histograms");
  summarize->add_option("dataset_root", root, "dataset directory")->required();
  summarize->add_option("-o,--output-dir", summary_out, "where the CSV files go");

  ExperimentFlags prepare_flags, run_flags;
  auto* prepare = app.add_subcommand("prepare", "window, featurize and sequence every subject");
  prepare_flags.attach(prepare);
  auto* run = app.add_subcommand("run", "leave-one-subject-out experiment");
  run_flags.attach(run);

  std::uint64_t seed = default_seed();
  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient suite");
  grad->add_option("--seed", seed, "probe seed");

  synth::SynthSpec spec;
  spec.noise_seed = default_seed();
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  synth->add_option("output_root", synth_out, "destination directory")->required();
  synth->add_option("--subjects", spec.n_subjects, "number of subjects");
  synth->add_option("--duration", spec.duration_s, "seconds per condition");
  synth->add_option("--separation", spec.separation, "stress EDA shift in noise sigmas");
  synth->add_option("--seed", spec.noise_seed, "noise seed");
  synth->add_option("--missing-rate", spec.missing_rate, "fraction of NaN samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kConfigError;
  }

  try {
    if (*validate) return cli::cmd_validate(root, std::cout, std::cerr);
    if (*summarize) return cli::cmd_summarize(root, summary_out, std::cout, std::cerr);
    if (*grad) return cli::cmd_grad_check(seed, std::cout, std::cerr);
    if (*synth) return cli::cmd_synth(spec, synth_out, std::cout, std::cerr);
    if (*prepare) return cli::cmd_prepare(prepare_flags.resolve(prepare), std::cout, std::cerr);
    if (*run) return cli::cmd_run(run_flags.resolve(run), std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kRuntimeError;
  }
  return cli::kConfigError;
}
