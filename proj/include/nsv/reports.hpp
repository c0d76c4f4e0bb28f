#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsv/config.hpp"
#include "nsv/statistics.hpp"
#include "nsv/sweep.hpp"

namespace nsv {

struct ReportSet {
    RunConfig config;
    std::optional<BudgetReport> budget;
    std::optional<SweepReport> sweep;
    /// Free-form "key: value" lines appended to meta.txt as comments.
    std::vector<std::string> summary;
};

/// Writes spectrum.csv, budget.csv, balance.csv, sweep.csv, gevrey.csv and
/// meta.txt into `dir` (created if missing). Absent parts give header-only files.
void emit_reports(const std::string& dir, const ReportSet& reports);

/// Shell label of spectrum bin i (3D bins are |k| rounded; shells count from 1).
inline std::size_t shell_label(Mode mode, std::size_t bin) { return mode == Mode::Shell ? bin + 1 : bin; }

}  // namespace nsv
