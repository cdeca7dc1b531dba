#include "cli/commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "affect/featureize.hpp"
#include "affect/harness/loso.hpp"
#include "affect/harness/report.hpp"
#include "affect/models/gradcheck_suite.hpp"
#include "affect/nn/checkpoint.hpp"
#include "affect/signal.hpp"

#ifndef AFFECT_VERSION
#define AFFECT_VERSION "dev"
#endif

namespace affect::cli {

namespace fs = std::filesystem;

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return kConfigError;
    case Errc::MissingChannel:
    case Errc::RateMismatch:
    case Errc::DurationMismatch:
    case Errc::ParseError:
    case Errc::NoBaselineData:
    case Errc::RecordingTooShort:
    case Errc::AllMissing:
    case Errc::EmptyWindow:
    case Errc::UnmappableLabel:
    case Errc::DegenerateClassDistribution:
    case Errc::EmptyLabeledSet:
    case Errc::EmptyTrainSet:
    case Errc::NoSubjects: return kDataError;
    default: return kRuntimeError;
  }
}

std::string version_string() { return AFFECT_VERSION; }

namespace {

std::vector<fs::path> subject_dirs_or_throw(const fs::path& root) {
  auto dirs = signal::list_subject_dirs(root);
  if (dirs.empty()) throw Error(Errc::NoSubjects, "no subjects found under " + root.string());
  return dirs;
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(Errc::IoError, "short write to " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

// Cache key of one subject: preparation settings plus the size and mtime of
// every input file.
std::string subject_key(const ExperimentConfig& cfg, const fs::path& dir) {
  std::string text = fmt::format("prep-v1 window={}/{} rate={} steps={} coverage={}\n",
                                 cfg.window.length_label_samples, cfg.window.step_label_samples,
                                 cfg.window.label_rate_hz, cfg.sequence.steps,
                                 cfg.sequence.min_coverage);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto stamp = fs::last_write_time(f).time_since_epoch().count();
    text += fmt::format("{} {} {}\n", f.filename().string(), fs::file_size(f), stamp);
  }
  return hex_digest(fnv1a(text));
}

}  // namespace

int cmd_validate(const fs::path& dataset_root, std::ostream& out, std::ostream& err) {
  const auto dirs = signal::list_subject_dirs(dataset_root);
  if (dirs.empty()) {
    fmt::print(err, "no subjects found under {}\n", dataset_root.string());
    return kDataError;
  }
  std::size_t failures = 0;
  for (const auto& dir : dirs) {
    const auto id = dir.filename().string();
    try {
      const auto rec = signal::load_subject(dir);
      std::string counts;
      for (auto ch : signal::kChannels) {
        counts += fmt::format(" {}={}", signal::channel_name(ch), rec.channel(ch).samples.size());
      }
      fmt::print(out, "OK {} duration={:.2f}s{} labels={}\n", id, signal::duration_seconds(rec),
                 counts, rec.label_track.labels.size());
    } catch (const Error& e) {
      ++failures;
      fmt::print(out, "FAIL {}: {}\n", id, e.what());
    }
  }
  fmt::print(out, "{} of {} subjects valid\n", dirs.size() - failures, dirs.size());
  return failures ? kDataError : kOk;
}

int cmd_summarize(const fs::path& dataset_root, const fs::path& output_dir, std::ostream& out,
                  std::ostream& err) {
  try {
    const auto dirs = subject_dirs_or_throw(dataset_root);
    std::vector<signal::SubjectRecording> recs;
    for (const auto& d : dirs) recs.push_back(signal::load_subject(d));
    ensure_dir(output_dir);

    std::array<std::size_t, signal::kLabelKinds> label_counts{};
    for (const auto& r : recs) {
      for (auto l : r.label_track.labels) ++label_counts[std::size_t(signal::label_id(l))];
    }
    std::string labels = "label,count\n";
    for (std::size_t k = 0; k < signal::kLabelKinds; ++k) {
      labels += fmt::format("{},{}\n", signal::label_name(signal::Label(k)), label_counts[k]);
    }
    write_text(output_dir / "label_counts.csv", labels);

    std::string samples = "channel,count\n";
    std::string missing = "channel,nan_count\n";
    for (auto ch : signal::kChannels) {
      std::size_t total = 0, nans = 0;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& r : recs) {
        for (double v : r.channel(ch).samples) {
          ++total;
          if (std::isnan(v)) {
            ++nans;
            continue;
          }
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      samples += fmt::format("{},{}\n", signal::channel_name(ch), total);
      missing += fmt::format("{},{}\n", signal::channel_name(ch), nans);

      std::vector<std::size_t> bins(kHistogramBins, 0);
      const double width = (hi - lo) / double(kHistogramBins);
      if (total > nans) {
        for (const auto& r : recs) {
          for (double v : r.channel(ch).samples) {
            if (std::isnan(v)) continue;
            auto k = width > 0.0 ? std::size_t((v - lo) / width) : 0;
            ++bins[std::min(k, kHistogramBins - 1)];
          }
        }
      }
      std::string hist = "bin_lo,bin_hi,count\n";
      for (std::size_t k = 0; k < kHistogramBins && total > nans; ++k) {
        const double b_lo = lo + width * double(k);
        const double b_hi = k + 1 == kHistogramBins ? hi : lo + width * double(k + 1);
        hist += fmt::format("{},{},{}\n", b_lo, b_hi, bins[k]);
      }
      write_text(output_dir / fmt::format("hist_{}.csv", signal::channel_file_stem(ch)), hist);
    }
    write_text(output_dir / "sample_counts.csv", samples);
    write_text(output_dir / "missing_counts.csv", missing);
    fmt::print(out, "summarized {} subjects into {}\n", recs.size(), output_dir.string());
    return kOk;
  } catch (const Error& e) {
    fmt::print(err, "summarize: {}\n", e.what());
    return exit_code_for(e.code());
  }
}

Prepared prepare(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.dataset_root.empty()) throw Error(Errc::InvalidArgument, "dataset_root is not set");
  auto dirs = subject_dirs_or_throw(cfg.dataset_root);
  if (cfg.subjects > 0) {
    if (cfg.subjects > dirs.size()) {
      throw Error(Errc::InvalidArgument, fmt::format("subjects = {} but only {} found",
                                                     cfg.subjects, dirs.size()));
    }
    dirs.resize(cfg.subjects);
  }
  Prepared out;
  out.cache_hit = true;
  const auto cache_root = cfg.effective_cache_dir();
  std::string combined;
  for (const auto& dir : dirs) {
    const auto id = dir.filename().string();
    const auto key = subject_key(cfg, dir);
    combined += id + ":" + key + "\n";
    const auto entry = cache_root / fmt::format("{}-{}", id, key);
    const auto seq_path = entry / "sequences.csv";
    const auto done = entry / "complete";
    if (fs::exists(done)) {
      auto samples = data::read_sequences_csv(seq_path, cfg.sequence.steps);
      for (auto& s : samples) s.subject_id = id;
      fmt::print(log, "{}: cache hit, {} sequences\n", id, samples.size());
      out.subjects.push_back({id, std::move(samples)});
      continue;
    }
    out.cache_hit = false;
    const auto rec = signal::load_subject(dir);
    const auto frames = features::extract_frames(features::baseline_normalize(rec), cfg.window);
    auto samples = data::build_sequences(frames, id, cfg.sequence);
    ensure_dir(entry);
    features::write_frames_csv(frames, entry / "frames.csv");
    data::write_sequences_csv(samples, seq_path);
    write_text(done, fmt::format("frames={}\nsequences={}\n", frames.size(), samples.size()));
    fmt::print(log, "{}: prepared {} frames, {} sequences\n", id, frames.size(), samples.size());
    out.subjects.push_back({id, std::move(samples)});
  }
  out.hash = hex_digest(fnv1a(combined));
  out.cache_path = cache_root;
  return out;
}

int cmd_prepare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const auto p = prepare(cfg, out);
    fmt::print(out, "{} subjects, cache {} ({}), key {}\n", p.subjects.size(),
               p.cache_hit ? "hit" : "miss", p.cache_path.string(), p.hash);
    return kOk;
  } catch (const Error& e) {
    fmt::print(err, "prepare: {}\n", e.what());
    return exit_code_for(e.code());
  }
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const auto prep = prepare(cfg, out);
    const auto& subjects = prep.subjects;
    const std::string model(eval::model_kind_name(cfg.model));
    const auto run_hash = hex_digest(fnv1a(prep.hash + "\n" + describe(cfg)));

    ensure_dir(cfg.output_dir / "logs");
    ensure_dir(cfg.output_dir / "checkpoints");

    eval::LosoOptions opts;
    opts.kind = cfg.model;
    opts.train = cfg.train;
    opts.shape = cfg.shape;
    opts.fold = cfg.fold;
    opts.repeats = cfg.repeats;
    opts.seed = cfg.seed;
    opts.jobs = cfg.jobs;

    // Resume: reuse finished cells only when they came from this exact setup.
    const auto cells_path = cfg.output_dir / fmt::format("cells_{}.csv", model);
    const auto stamp = fmt::format("# run={}", run_hash);
    bool resume = false;
    {
      std::ifstream is(cells_path);
      std::string first;
      resume = is && std::getline(is, first) && first == stamp;
    }
    if (resume) {
      for (const auto& r : eval::read_cell_rows(cells_path)) {
        for (std::size_t f = 0; f < subjects.size(); ++f) {
          if (subjects[f].subject_id == r.subject_id && r.repeat_idx < cfg.repeats) {
            opts.skip.insert({r.repeat_idx, f});
            opts.prior.push_back(r);
          }
        }
      }
      // A torn final line would otherwise glue onto the next appended row.
      std::string text;
      {
        std::ifstream is(cells_path, std::ios::binary);
        text.assign(std::istreambuf_iterator<char>(is), {});
      }
      const auto cut = text.rfind('\n');
      write_text(cells_path, text.substr(0, cut == std::string::npos ? 0 : cut + 1));
      fmt::print(out, "resuming: {} of {} cells already done\n", opts.skip.size(),
                 cfg.repeats * subjects.size());
    } else {
      write_text(cells_path, stamp + "\n" + eval::kCellHeader + "\n");
    }

    std::ofstream cells(cells_path, std::ios::binary | std::ios::app);
    if (!cells) throw Error(Errc::IoError, "cannot append to " + cells_path.string());
    opts.on_cell = [&](const eval::CellOutcome& c) {
      const auto& r = c.report;
      const auto stem = fmt::format("{}_r{}_{}", model, r.repeat_idx, r.subject_id);
      write_text(cfg.output_dir / "logs" / (stem + ".csv"), c.training_log);
      nn::save_checkpoint(c.params, cfg.output_dir / "checkpoints" / (stem + ".ckpt"));
      cells << eval::format_cell_row(r);
      cells.flush();
      fmt::print(out, "repeat {} {}: accuracy={:.4f} auc={:.4f}{}\n", r.repeat_idx, r.subject_id,
                 r.accuracy, r.auc, r.flagged() ? " [flagged]" : "");
      out.flush();
    };

    const auto result = eval::run_loso(subjects, opts);

    std::size_t flagged = 0;
    for (const auto& r : result.reports) flagged += r.flagged() ? 1 : 0;
    eval::Metadata meta = {
        {"tool", "affect-ssl " + version_string()},
        {"model", model},
        {"config_hash", run_hash},
        {"data_hash", prep.hash},
        {"seed", std::to_string(cfg.seed)},
        {"subjects", std::to_string(subjects.size())},
        {"epochs", std::to_string(cfg.train.epochs)},
        {"flagged_cells", std::to_string(flagged)},
    };
    if (cfg.model != eval::ModelKind::Supervised) {
      meta.emplace_back("labeled_fraction", fmt::format("{}", cfg.train.labeled_fraction));
    }
    const auto table_path = cfg.output_dir / fmt::format("table_{}.csv", model);
    eval::write_report_csv(result.table, table_path, meta);
    fmt::print(out, "MEAN accuracy={:.4f} auc={:.4f} f1={:.4f} -> {}\n", result.table.mean.accuracy,
               result.table.mean.auc, result.table.mean.f1, table_path.string());
    return kOk;
  } catch (const Error& e) {
    fmt::print(err, "run: {}\n", e.what());
    return exit_code_for(e.code());
  }
}

int cmd_grad_check(std::uint64_t seed, std::ostream& out, std::ostream& err) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = models::run_gradcheck_suite(seed);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double worst = 0.0;
    for (const auto& r : results) {
      worst = std::max(worst, r.max_rel_error);
      fmt::print(out, "{:<26} entries={:<5} max_rel_error={:.3e} {}\n", r.name, r.entries_checked,
                 r.max_rel_error, r.max_rel_error <= kGradCheckTolerance ? "ok" : "FAIL");
    }
    fmt::print(out, "max relative error {:.3e} (tolerance {:.0e}) in {:.2f}s\n", worst,
               kGradCheckTolerance, secs);
    return worst <= kGradCheckTolerance ? kOk : kRuntimeError;
  } catch (const Error& e) {
    fmt::print(err, "grad-check: {}\n", e.what());
    return exit_code_for(e.code());
  }
}

int cmd_synth(const synth::SynthSpec& spec, const fs::path& output_root, std::ostream& out,
              std::ostream& err) {
  try {
    synth::generate(spec, output_root);
    fmt::print(out, "wrote {} subjects to {}\n", spec.n_subjects, output_root.string());
    return kOk;
  } catch (const Error& e) {
    fmt::print(err, "synth: {}\n", e.what());
    return exit_code_for(e.code());
  }
}

}  // namespace affect::cli
