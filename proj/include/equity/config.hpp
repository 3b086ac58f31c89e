#pragma once

// Run configuration shared by the command-line subcommands, loadable from a
// TOML file.

#include "equity/loop_sim.hpp"
#include "equity/scoring.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace equity {

struct RegimeFlags {
    bool equal_access = false;
    bool equal_outcome = false;
    bool equal_utilization = false;

    // e.g. "acc-eq_out-ne_util-ne"; stable identifiers used as report names.
    std::string name() const;
    bool operator==(const RegimeFlags&) const = default;
};

// The eight (equal/unequal)^3 combinations, fully unequal first.
std::vector<RegimeFlags> all_regime_flags();

enum class ReportFormat { json, csv };
std::string to_string(ReportFormat f);
ReportFormat report_format_from_string(const std::string& s);

struct RunConfig {
    // Case study
    std::filesystem::path input;
    std::string dialect = "auto";             // auto | semicolon | comma
    std::optional<RegimeFlags> regime;        // unset runs all eight combinations
    double tau = 0.85;
    double tau_o = 0.15;
    double epsilon = kDefaultOutcomeEpsilon;
    int pass_mark = 10;
    double train_fraction = 0.7;
    // Share of a flagged student's intended-view uplift that disappears once
    // their access obstacles are alleviated.
    double access_resurfacing = 0.5;
    // Policy allowance used by the equal-* regimes; infinity alleviates all obstacles.
    double alleviation_delta = std::numeric_limits<double>::infinity();
    std::size_t threshold_quantiles = 40;
    std::uint64_t seed = 7;

    // Output
    std::filesystem::path out_dir = "out";
    std::vector<ReportFormat> formats{ReportFormat::json};

    // Inequity loop
    SyntheticConfig loop;
    std::size_t loop_rounds = 10;
    std::vector<Regime> loop_regimes{Regime::no_equity, Regime::access_only, Regime::access_and_outcome,
                                     Regime::full_equity};

    // Equity scoring
    ScoringConfig scoring;

    void validate() const;
    char delimiter() const;   // 0 for auto-detection
};

// Top-level keys: seed, out, format (string or array of strings).
// Tables: [casestudy], [loop], [scoring]; keys mirror the field names above.
// Throws DataError on syntax errors, unknown keys or wrong value types.
RunConfig parse_run_config(std::string_view toml_text, const std::string& source = "<memory>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace equity
