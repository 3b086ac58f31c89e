#include "equity/postprocess.hpp"

#include "equity/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace equity {

namespace {

Vec candidate_cuts(const Vec& scores, const std::vector<int>& groups, int g, std::size_t q) {
    Vec s;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (groups[i] == g) s.push_back(scores[i]);
    }
    Vec cuts{0.5};
    if (s.empty()) return cuts;
    std::sort(s.begin(), s.end());
    for (std::size_t k = 0; k <= q; ++k) {
        const std::size_t idx = std::min(s.size() - 1, k * (s.size() - 1) / std::max<std::size_t>(q, 1));
        cuts.push_back(s[idx]);
    }
    cuts.push_back(std::nextafter(s.back(), std::numeric_limits<double>::infinity()));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

}  // namespace

std::vector<int> apply_group_thresholds(const GroupThresholds& t, const Vec& scores,
                                        const std::vector<int>& groups) {
    if (scores.size() != groups.size()) throw DimensionError("scores and groups differ in length");
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = scores[i] >= t.cut.at(static_cast<std::size_t>(groups[i])) ? 1 : 0;
    }
    return out;
}

GroupThresholds fit_group_thresholds(const Vec& scores, const std::vector<int>& labels,
                                     const std::vector<int>& groups, double max_violation,
                                     std::size_t quantiles) {
    if (scores.size() != labels.size() || scores.size() != groups.size()) {
        throw DimensionError("fit_group_thresholds: input lengths differ");
    }
    const Vec cuts0 = candidate_cuts(scores, groups, 0, quantiles);
    const Vec cuts1 = candidate_cuts(scores, groups, 1, quantiles);

    GroupThresholds best_feasible, best_any;
    bool have_feasible = false, have_any = false;
    for (double c0 : cuts0) {
        for (double c1 : cuts1) {
            GroupThresholds t;
            t.cut = {c0, c1};
            const auto preds = apply_group_thresholds(t, scores, groups);
            double omega = 0.0;
            try {
                omega = eo_violation(preds, labels, groups).eo_violation;
            } catch (const UndefinedMetricError&) {
                continue;
            }
            std::size_t wrong = 0;
            for (std::size_t i = 0; i < preds.size(); ++i) wrong += preds[i] != labels[i];
            t.eo_violation = omega;
            t.error_rate = static_cast<double>(wrong) / static_cast<double>(preds.size());
            if (omega <= max_violation) {
                t.feasible = true;
                if (!have_feasible || t.error_rate < best_feasible.error_rate) {
                    best_feasible = t;
                    have_feasible = true;
                }
            }
            if (!have_any || omega < best_any.eo_violation ||
                (omega == best_any.eo_violation && t.error_rate < best_any.error_rate)) {
                best_any = t;
                have_any = true;
            }
        }
    }
    if (have_feasible) return best_feasible;
    if (!have_any) throw UndefinedMetricError("EO violation undefined for every threshold pair");
    return best_any;
}

}  // namespace equity
