#pragma once

#include "equity/config.hpp"
#include "equity/metrics.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace equity {

using NamedReport = std::pair<std::string, EquityReport>;

// Long-format rows: regime,metric,group,value. Group is "all" for
// population-level metrics and the group code otherwise.
std::string report_csv(const std::vector<NamedReport>& reports, bool header = true);
std::size_t report_csv_cells(const EquityReport& report);

// Writes <name>.json or <name>.csv per report into out_dir (created if
// missing) and returns the written paths. Throws DataError naming the path
// on I/O failure.
std::vector<std::filesystem::path> emit_report(const std::vector<NamedReport>& reports, ReportFormat format,
                                               const std::filesystem::path& out_dir);

// Writes text to a file, creating parent directories; DataError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

struct ChecklistSection {
    std::string task;
    std::vector<std::string> questions;
};

const std::vector<ChecklistSection>& checklist();

// Title, then each task followed by its numbered questions.
std::string emit_checklist();

}  // namespace equity
