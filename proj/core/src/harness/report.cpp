#include "affect/harness/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::eval {

namespace {

std::string format_row(const AggregateRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.subject, r.loss, r.accuracy, r.auc,
                     r.tp, r.tn, r.fp, r.fn, r.precision, r.recall, r.f1);
}

}  // namespace

std::string format_report_csv(const AggregateTable& table, const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += fmt::format("# {}={}\n", k, v);
  out += fmt::format("# repeats={}\n", table.repeats);
  out += kReportHeader;
  out += '\n';
  for (const auto& row : table.rows) out += format_row(row);
  auto mean = table.mean;
  mean.subject = "MEAN";
  out += format_row(mean);
  return out;
}

void write_report_csv(const AggregateTable& table, const std::filesystem::path& path,
                      const Metadata& meta) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os << format_report_csv(table, meta);
  if (!os) throw Error(Errc::IoError, "short write to " + path.string());
}

std::string format_cell_row(const MetricsReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.repeat_idx, r.subject_id,
                     r.loss, r.accuracy, r.auc, r.tp, r.tn, r.fp, r.fn, r.precision, r.recall,
                     r.f1, int(r.collapsed), int(r.auc_undefined), int(r.degenerate_prf));
}

std::vector<MetricsReport> read_cell_rows(const std::filesystem::path& path) {
  std::vector<MetricsReport> out;
  std::ifstream is(path);
  if (!is) return out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("repeat,", 0) == 0) continue;
    if (is.eof()) break;  // no trailing newline: the writer was interrupted
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 15) continue;
    auto num = [](const std::string& s) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw Error(Errc::ParseError, "bad number '" + s + "' in cell log");
      }
      return v;
    };
    MetricsReport r;
    r.repeat_idx = static_cast<std::size_t>(num(f[0]));
    r.subject_id = f[1];
    r.loss = num(f[2]);
    r.accuracy = num(f[3]);
    r.auc = num(f[4]);
    r.tp = static_cast<std::size_t>(num(f[5]));
    r.tn = static_cast<std::size_t>(num(f[6]));
    r.fp = static_cast<std::size_t>(num(f[7]));
    r.fn = static_cast<std::size_t>(num(f[8]));
    r.precision = num(f[9]);
    r.recall = num(f[10]);
    r.f1 = num(f[11]);
    r.collapsed = num(f[12]) != 0.0;
    r.auc_undefined = num(f[13]) != 0.0;
    r.degenerate_prf = num(f[14]) != 0.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace affect::eval
