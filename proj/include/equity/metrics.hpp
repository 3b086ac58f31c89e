#pragma once

// Access (Psi), outcomes (Omega, the equalized-odds violation), utilization
// (zeta), the feature/label/obstacle proxy gaps and the composite equity score.

#include "equity/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace equity {

struct AccessReport {
    double psi = 0.0;
    std::vector<bool> per_individual;
    std::map<int, double> per_group;
};

struct OutcomeReport {
    double eo_violation = 0.0;
    std::map<int, double> tpr_by_group;
    std::map<int, double> fpr_by_group;
    bool equal_outcomes = false;
};

// One proxy-positive individual evaluated by the intended model.
struct EvaluationRecord {
    std::string id;
    int grp = 0;
    int y_pt = 1;   // proxy prediction
    int y_tt = 0;   // intended-model outcome
};

struct UtilizationReport {
    double zeta = 0.0;
    std::size_t m = 0;
    double true_positive_share = 0.0;
    double false_positive_share = 0.0;
    // Within-group false-positive fraction among that group's proxy-positives.
    // Groups without proxy-positives are absent.
    std::map<int, double> per_group_fp_share;
    // Composition of all false positives by group (sums to 1 when any exist).
    std::map<int, double> fp_composition;
};

struct ObstacleGap {
    std::size_t unmatched_affected_features = 0;
    double alpha_l1_distance_on_matched = 0.0;
};

struct GapReport {
    std::vector<int> gamma_x;
    Vec gamma_l;
    ObstacleGap obstacle_gap;
};

struct EquityReport {
    AccessReport access;
    OutcomeReport outcome;
    UtilizationReport utilization;
    std::optional<GapReport> gaps;
    double score = 0.0;
};

// An obstacle model together with the names of the features it ranges over.
struct NamedObstacleModel {
    ObstacleModel model;
    std::vector<std::string> feature_names;
};

constexpr double kDefaultOutcomeEpsilon = 1e-9;

AccessReport model_access(const Population& pop, const ObstacleModel& om, const Policy& policy);

// Omega = |TPR_0 - TPR_1| + |FPR_0 - FPR_1| by exact counting. Throws
// UndefinedMetricError naming the group when a rate has an empty denominator.
OutcomeReport eo_violation(const std::vector<int>& preds, const std::vector<int>& labels,
                           const std::vector<int>& groups,
                           double epsilon = kDefaultOutcomeEpsilon);

// Records must all be proxy-positives; throws UndefinedMetricError when empty.
UtilizationReport utilization(const std::vector<EvaluationRecord>& records);

// Case-insensitive, trimmed, with runs of whitespace/underscores collapsed to
// a single space.
std::string normalize_feature_name(const std::string& name);

// For each intended feature, the index of its name-equivalent proxy feature.
std::vector<std::optional<std::size_t>> match_features(
    const std::vector<std::string>& proxy_features,
    const std::vector<std::string>& intended_features);

std::vector<int> feature_proxy_gap(const std::vector<std::string>& proxy_features,
                                   const std::vector<std::string>& intended_features);

Vec label_proxy_gap(std::span<const double> omega_p, std::span<const double> omega_t,
                    const std::vector<std::optional<std::size_t>>& matching);

ObstacleGap obstacle_gap(const NamedObstacleModel& proxy, const NamedObstacleModel& intended);

GapReport proxy_gaps(const std::vector<std::string>& proxy_features, std::span<const double> omega_p,
                     const std::vector<std::string>& intended_features,
                     std::span<const double> omega_t, const NamedObstacleModel& proxy_obstacles,
                     const NamedObstacleModel& intended_obstacles);

// Psi + (1 - min(Omega, 1)) + zeta, in [0, 3].
double equity_score(double psi, double omega, double zeta);
double equity_score(const AccessReport& access, const OutcomeReport& outcome,
                    const UtilizationReport& util);

EquityReport make_equity_report(AccessReport access, OutcomeReport outcome,
                                UtilizationReport util, std::optional<GapReport> gaps = {});

bool is_zero_vector(std::span<const double> v);

void to_json(nlohmann::json& j, const AccessReport& r);
void to_json(nlohmann::json& j, const OutcomeReport& r);
void to_json(nlohmann::json& j, const UtilizationReport& r);
void to_json(nlohmann::json& j, const ObstacleGap& r);
void to_json(nlohmann::json& j, const GapReport& r);
void to_json(nlohmann::json& j, const EquityReport& r);
void from_json(const nlohmann::json& j, AccessReport& r);
void from_json(const nlohmann::json& j, OutcomeReport& r);
void from_json(const nlohmann::json& j, UtilizationReport& r);
void from_json(const nlohmann::json& j, ObstacleGap& r);
void from_json(const nlohmann::json& j, GapReport& r);
void from_json(const nlohmann::json& j, EquityReport& r);

}  // namespace equity
