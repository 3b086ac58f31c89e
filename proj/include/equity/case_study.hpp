#pragma once

// Student-admission case study: an "admissibility" proxy model decides who is
// admitted and a "likelihood to thrive" intended model evaluates the admitted,
// under every combination of equal/unequal access, outcomes and utilization.

#include "equity/config.hpp"
#include "equity/core.hpp"
#include "equity/learner.hpp"
#include "equity/metrics.hpp"
#include "equity/postprocess.hpp"
#include "equity/uci.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace equity {

const std::vector<std::string>& case_study_proxy_features();
const std::vector<std::string>& case_study_intended_features();
const std::vector<std::string>& case_study_proxy_affected();
const std::vector<std::string>& case_study_intended_affected();

// Both views list the same students in the same order with matching ids.
// Observed UCI values are the obstacle-refrained x; z adds the uplift on the
// affected features of flagged students. Group is sex (F = 1, M = 0) and
// labels are pass/fail on G3, identical in both views.
struct CaseStudyViews {
    Population proxy_view;
    Population intended_view;
    ObstacleModel proxy_obstacles;
    ObstacleModel intended_obstacles;
    std::vector<bool> obstacle_flags;
};

CaseStudyViews build_case_study_views(const StudentTable& raw, const RunConfig& cfg);

struct RegimeResult {
    RegimeFlags flags;
    std::optional<EquityReport> report;   // empty when the regime is degenerate
    std::string error;                    // reason the regime is degenerate
    std::array<double, 2> positive_rate{0.0, 0.0};   // admitted share by group (0 = M, 1 = F)
    GroupThresholds thresholds;           // cut-offs applied to proxy scores

    std::string name() const { return flags.name(); }
};

struct CaseStudyResult {
    std::size_t students = 0;
    std::size_t flagged = 0;
    std::size_t test_size = 0;
    std::vector<RegimeResult> regimes;
    TrainedModel proxy_model;      // admissibility, fitted once on historical records
    TrainedModel intended_model;   // performance, fitted on the obstacle-free intended view
    NamedObstacleModel proxy_obstacles;
    NamedObstacleModel intended_obstacles;

    const RegimeResult& find(const RegimeFlags& flags) const;
};

// Runs cfg.regime, or all eight combinations when it is unset.
CaseStudyResult run_case_study(const CaseStudyViews& views, const RunConfig& cfg);
CaseStudyResult run_case_study(const RunConfig& cfg);

// Plot-ready tables.
// regime,group,positive_rate
std::string admissibility_table_csv(const CaseStudyResult& r);
// regime,eo_violation,tpr_g0,tpr_g1,fpr_g0,fpr_g1
std::string eo_table_csv(const CaseStudyResult& r);
// regime,tp_share,fp_share,fp_share_g0,fp_share_g1,fp_composition_g0,fp_composition_g1
std::string utilization_table_csv(const CaseStudyResult& r);

// A trained model together with its obstacle weights by feature name; the
// format accepted by the gaps subcommand.
nlohmann::json model_document(const TrainedModel& model, const NamedObstacleModel& obstacles);

void to_json(nlohmann::json& j, const RegimeResult& r);
void to_json(nlohmann::json& j, const CaseStudyResult& r);

}  // namespace equity
