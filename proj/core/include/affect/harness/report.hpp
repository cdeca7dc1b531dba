#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affect/harness/metrics.hpp"

namespace affect::eval {

/// `# key=value` lines written ahead of the CSV header.
using Metadata = std::vector<std::pair<std::string, std::string>>;

inline constexpr const char* kReportHeader =
    "subject,loss,accuracy,auc,tp,tn,fp,fn,precision,recall,f1";

/// One row per subject plus a final MEAN row.
std::string format_report_csv(const AggregateTable& table, const Metadata& meta = {});
void write_report_csv(const AggregateTable& table, const std::filesystem::path& path,
                      const Metadata& meta = {});

/// Per-cell record used to resume interrupted runs.
inline constexpr const char* kCellHeader =
    "repeat,subject,loss,accuracy,auc,tp,tn,fp,fn,precision,recall,f1,collapsed,auc_undefined,"
    "degenerate_prf";

std::string format_cell_row(const MetricsReport& r);
/// Reads every complete row; a truncated final line is ignored.
std::vector<MetricsReport> read_cell_rows(const std::filesystem::path& path);

}  // namespace affect::eval
