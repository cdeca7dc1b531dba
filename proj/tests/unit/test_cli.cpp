#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>
#include <sstream>

#include "affect/harness/report.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "fixtures.hpp"

using namespace affect;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream is(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  return lines;
}

std::size_t count_prefix(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += line.starts_with(prefix);
  return n;
}

const fs::path& synth_root() {
  static const fs::path root = [] {
    auto dir = fixture::scratch_dir("cli_synth");
    synth::SynthSpec spec;
    spec.n_subjects = 3;
    spec.duration_s = 60.0;
    synth::generate(spec, dir);
    return dir;
  }();
  return root;
}

cli::ExperimentConfig quick_config(const std::string& name, const std::string& model) {
  return cli::resolve_config({{"dataset_root", synth_root().string()},
                              {"output_dir", fixture::scratch_dir(name).string()},
                              {"model", model},
                              {"epochs", "2"},
                              {"hidden", "3"},
                              {"latent_dim", "8"},
                              {"generator_hidden", "8"},
                              {"seed", "5"}});
}

int run_binary(const std::string& args) {
  const char* bin = std::getenv("AFFECT_SSL_BIN");
  if (!bin) return -1;
  const int status = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesFlatFile) {
  const auto v = cli::parse_config("# comment\nrepeats = 3\nlabeled-fraction=0.5  # trailing\n\n");
  EXPECT_EQ(v.at("repeats"), "3");
  EXPECT_EQ(v.at("labeled_fraction"), "0.5");
  EXPECT_EQ(v.size(), 2u);
}

TEST(Config, RejectsUnknownKeyAndBadLines) {
  EXPECT_THROW(cli::parse_config("colour = red\n"), Error);
  EXPECT_THROW(cli::parse_config("repeats 3\n"), Error);
}

TEST(Config, Defaults) {
  unsetenv("AFFECT_SSL_SEED");
  const auto sup = cli::resolve_config({});
  EXPECT_EQ(sup.train.epochs, 15u);
  EXPECT_EQ(sup.seed, 0u);
  EXPECT_EQ(sup.window.length_label_samples, 42000);
  EXPECT_EQ(sup.window.step_label_samples, 175);
  EXPECT_EQ(sup.sequence.steps, 10u);
  EXPECT_EQ(sup.train.labeled_fraction, 0.3);
  const auto sgan = cli::resolve_config({{"model", "sgan"}});
  EXPECT_EQ(sgan.train.epochs, 30u);
}

TEST(Config, SeedFromEnvironment) {
  setenv("AFFECT_SSL_SEED", "1234", 1);
  EXPECT_EQ(cli::resolve_config({}).seed, 1234u);
  EXPECT_EQ(cli::resolve_config({{"seed", "7"}}).seed, 7u);
  unsetenv("AFFECT_SSL_SEED");
}

TEST(Config, RejectsOutOfRange) {
  EXPECT_THROW(cli::resolve_config({{"labeled_fraction", "0"}}), Error);
  EXPECT_THROW(cli::resolve_config({{"repeats", "0"}}), Error);
  EXPECT_THROW(cli::resolve_config({{"window_step", "50000"}}), Error);
  EXPECT_THROW(cli::resolve_config({{"model", "cnn"}}), Error);
  EXPECT_THROW(cli::resolve_config({{"lr", "fast"}}), Error);
}

TEST(Validate, CleanDataset) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_validate(synth_root(), out, err), cli::kOk);
  EXPECT_EQ(count_prefix(out.str(), "OK "), 3u);
}

TEST(Validate, OneCorruptSubject) {
  const auto root = fixture::scratch_dir("cli_corrupt");
  fs::copy(synth_root(), root, fs::copy_options::recursive);
  fs::remove(root / "S3" / "temp.csv");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_validate(root, out, err), cli::kDataError);
  EXPECT_EQ(count_prefix(out.str(), "OK "), 2u);
  EXPECT_EQ(count_prefix(out.str(), "FAIL S3"), 1u);
}

TEST(Validate, EmptyRoot) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_validate(fixture::scratch_dir("cli_empty"), out, err), cli::kDataError);
  EXPECT_NE(err.str().find("no subjects found"), std::string::npos);
}

TEST(Summarize, CountsAndHistograms) {
  const auto root = fixture::scratch_dir("cli_summary_data");
  auto rec = fixture::random_recording(10.0, 10.0, 4, 0.05);
  std::fill(rec.label_track.labels.begin(), rec.label_track.labels.end(), signal::Label::Baseline);
  std::fill_n(rec.label_track.labels.begin() + 50, 100, signal::Label::Stress);
  signal::store_subject(rec, root / "S2");
  const auto out_dir = fixture::scratch_dir("cli_summary_out");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_summarize(root, out_dir, out, err), cli::kOk) << err.str();

  const auto labels = read_lines(out_dir / "label_counts.csv");
  EXPECT_NE(std::find(labels.begin(), labels.end(), "STRESS,100"), labels.end());
  EXPECT_NE(std::find(labels.begin(), labels.end(), "BASELINE,6900"), labels.end());
  const auto samples = read_lines(out_dir / "sample_counts.csv");
  EXPECT_NE(std::find(samples.begin(), samples.end(), "BVP,640"), samples.end());

  for (auto ch : signal::kChannels) {
    const auto lines = read_lines(out_dir / ("hist_" + std::string(signal::channel_file_stem(ch)) + ".csv"));
    ASSERT_EQ(lines.size(), 1u + cli::kHistogramBins);
    EXPECT_EQ(lines[0], "bin_lo,bin_hi,count");
    std::size_t sum = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) sum += std::stoul(lines[i].substr(lines[i].rfind(',') + 1));
    std::size_t finite = 0;
    for (double v : rec.channel(ch).samples) finite += !std::isnan(v);
    EXPECT_EQ(sum, finite) << signal::channel_name(ch);
  }
}

TEST(Prepare, CacheHitMissAndFrameCounts) {
  auto cfg = quick_config("cli_prepare", "supervised");
  std::ostringstream log;
  const auto first = cli::prepare(cfg, log);
  EXPECT_FALSE(first.cache_hit);
  ASSERT_EQ(first.subjects.size(), 3u);

  const auto again = cli::prepare(cfg, log);
  EXPECT_TRUE(again.cache_hit);
  EXPECT_EQ(again.hash, first.hash);
  for (std::size_t s = 0; s < 3; ++s) {
    ASSERT_EQ(again.subjects[s].samples.size(), first.subjects[s].samples.size());
    for (std::size_t i = 0; i < first.subjects[s].samples.size(); ++i) {
      EXPECT_EQ(again.subjects[s].samples[i].inputs, first.subjects[s].samples[i].inputs);
      EXPECT_EQ(again.subjects[s].samples[i].label, first.subjects[s].samples[i].label);
    }
  }

  // 4 conditions x 60 s of labels: (168000 - 42000) / 175 + 1 windows.
  for (const auto& entry : fs::directory_iterator(cfg.effective_cache_dir())) {
    const auto rows = read_lines(entry.path() / "frames.csv").size() - 1;
    EXPECT_EQ(rows, (168000u - 42000u) / 175u + 1u);
  }

  cfg.window.step_label_samples = 350;
  EXPECT_FALSE(cli::prepare(cfg, log).cache_hit);
}

TEST(Run, SupervisedTableShape) {
  auto cfg = quick_config("cli_run_sup", "supervised");
  cfg.subjects = 3;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(cfg, out, err), cli::kOk) << err.str();
  const auto lines = read_lines(cfg.output_dir / "table_supervised.csv");
  std::size_t header = 0;
  while (lines[header].starts_with("#")) ++header;
  EXPECT_EQ(lines[header], eval::kReportHeader);
  EXPECT_EQ(lines.size(), header + 1 + 3 + 1);
  EXPECT_TRUE(lines.back().starts_with("MEAN,"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "logs" / "supervised_r0_S2.csv"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "checkpoints" / "supervised_r0_S4.ckpt"));
  EXPECT_EQ(read_lines(cfg.output_dir / "logs" / "supervised_r0_S3.csv").size(), 3u);
}

TEST(Run, SganMetadataNotesFraction) {
  auto cfg = quick_config("cli_run_sgan", "sgan");
  cfg.subjects = 2;
  cfg.train.epochs = 1;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(cfg, out, err), cli::kOk) << err.str();
  const auto lines = read_lines(cfg.output_dir / "table_sgan.csv");
  EXPECT_NE(std::find(lines.begin(), lines.end(), "# labeled_fraction=0.3"), lines.end());
  EXPECT_NE(std::find(lines.begin(), lines.end(), "# model=sgan"), lines.end());
}

TEST(Run, ResumesFromCompletedCells) {
  auto cfg = quick_config("cli_resume", "supervised");
  cfg.repeats = 2;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(cfg, out, err), cli::kOk) << err.str();
  const auto table = read_lines(cfg.output_dir / "table_supervised.csv");
  const auto cells_path = cfg.output_dir / "cells_supervised.csv";
  auto cells = read_lines(cells_path);
  ASSERT_EQ(cells.size(), 2u + 6u);

  // Keep two finished cells plus a torn third row.
  {
    std::ofstream os(cells_path, std::ios::trunc);
    for (std::size_t i = 0; i < 4; ++i) os << cells[i] << '\n';
    os << cells[4].substr(0, 5);
  }
  std::ostringstream out2;
  ASSERT_EQ(cli::cmd_run(cfg, out2, err), cli::kOk) << err.str();
  EXPECT_NE(out2.str().find("resuming: 2 of 6"), std::string::npos);
  EXPECT_EQ(count_prefix(out2.str(), "repeat "), 4u);
  EXPECT_EQ(read_lines(cfg.output_dir / "table_supervised.csv"), table);
  EXPECT_EQ(read_lines(cells_path).size(), 8u);
}

TEST(GradCheckCommand, Passes) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_grad_check(1, out, err), cli::kOk);
  EXPECT_NE(out.str().find("max relative error"), std::string::npos);
}

TEST(Binary, ExitCodes) {
  if (!std::getenv("AFFECT_SSL_BIN")) GTEST_SKIP() << "AFFECT_SSL_BIN not set";
  EXPECT_EQ(run_binary("validate " + synth_root().string()), 0);
  EXPECT_EQ(run_binary("validate " + fixture::scratch_dir("cli_bin_empty").string()), 1);
  EXPECT_EQ(run_binary("run --repeats 0"), 2);
  EXPECT_EQ(run_binary("run --model cnn"), 2);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  EXPECT_EQ(run_binary("prepare --dataset-root " + fixture::scratch_dir("cli_bin_none").string()), 1);

  // Flags override the config file.
  const auto dir = fixture::scratch_dir("cli_bin_cfg");
  std::ofstream(dir / "exp.conf") << "dataset_root = " << synth_root().string()
                                  << "\nrepeats = 0\n";
  EXPECT_EQ(run_binary("prepare --config " + (dir / "exp.conf").string()), 2);
  EXPECT_EQ(run_binary("prepare --config " + (dir / "exp.conf").string() + " --repeats 1 --cache-dir " +
                       (dir / "cache").string()),
            0);
}
