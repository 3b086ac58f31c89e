#pragma once

#include "equity/core.hpp"

#include <array>
#include <vector>

namespace equity {

// Group-specific decision thresholds on model scores.
struct GroupThresholds {
    std::array<double, 2> cut{0.5, 0.5};
    double eo_violation = 0.0;
    double error_rate = 0.0;
    bool feasible = false;   // eo_violation <= the requested bound
};

// Searches per-group thresholds (score quantiles plus the default 0.5) for the
// lowest error rate with EO violation <= max_violation; when no pair meets the
// bound, returns the pair with the smallest violation. Pairs whose violation is
// undefined are skipped. Throws UndefinedMetricError if every pair is undefined.
GroupThresholds fit_group_thresholds(const Vec& scores, const std::vector<int>& labels,
                                     const std::vector<int>& groups, double max_violation,
                                     std::size_t quantiles = 40);

std::vector<int> apply_group_thresholds(const GroupThresholds& t, const Vec& scores,
                                        const std::vector<int>& groups);

}  // namespace equity
