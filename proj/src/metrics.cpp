#include "equity/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace equity {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

nlohmann::json group_map_json(const std::map<int, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [g, v] : m) j[std::to_string(g)] = v;
    return j;
}

std::map<int, double> group_map_from_json(const nlohmann::json& j) {
    std::map<int, double> m;
    for (const auto& [k, v] : j.items()) m[std::stoi(k)] = v.get<double>();
    return m;
}

}  // namespace

// ============================================================================
// ACCESS
// ============================================================================

AccessReport model_access(const Population& pop, const ObstacleModel& om, const Policy& policy) {
    if (pop.empty()) throw DomainViolation("model access of an empty population is undefined");
    AccessReport r;
    r.per_individual.reserve(pop.size());
    std::array<std::size_t, 2> accessed{0, 0};
    std::array<std::size_t, 2> members{0, 0};
    std::size_t total = 0;
    for (const auto& ind : pop.individuals) {
        const bool ok = apply_policy(obstacle_magnitude(om, ind), policy) == 0.0;
        r.per_individual.push_back(ok);
        total += ok;
        if (ind.grp != 0 && ind.grp != 1) throw DomainViolation("group must be 0 or 1");
        members[ind.grp] += 1;
        accessed[ind.grp] += ok;
    }
    r.psi = static_cast<double>(total) / static_cast<double>(pop.size());
    for (int g = 0; g < 2; ++g) {
        if (members[g] > 0) {
            r.per_group[g] = static_cast<double>(accessed[g]) / static_cast<double>(members[g]);
        }
    }
    return r;
}

// ============================================================================
// OUTCOMES
// ============================================================================

OutcomeReport eo_violation(const std::vector<int>& preds, const std::vector<int>& labels,
                           const std::vector<int>& groups, double epsilon) {
    if (preds.size() != labels.size() || preds.size() != groups.size()) {
        throw DimensionError("eo_violation: predictions, labels and groups differ in length");
    }
    // [group][label] -> (count, predicted positive)
    std::array<std::array<std::size_t, 2>, 2> count{};
    std::array<std::array<std::size_t, 2>, 2> positive{};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int g = groups[i], y = labels[i], p = preds[i];
        if (g != 0 && g != 1) throw DomainViolation("group must be 0 or 1");
        if ((y != 0 && y != 1) || (p != 0 && p != 1)) {
            throw DomainViolation("labels and predictions must be binary");
        }
        count[g][y] += 1;
        positive[g][y] += p;
    }
    OutcomeReport r;
    for (int g = 0; g < 2; ++g) {
        if (count[g][0] + count[g][1] == 0) {
            throw UndefinedMetricError("group " + std::to_string(g) + " has no members");
        }
        if (count[g][1] == 0) {
            throw UndefinedMetricError("group " + std::to_string(g) +
                                       " has no positive labels: TPR undefined");
        }
        if (count[g][0] == 0) {
            throw UndefinedMetricError("group " + std::to_string(g) +
                                       " has no negative labels: FPR undefined");
        }
        r.tpr_by_group[g] = static_cast<double>(positive[g][1]) / static_cast<double>(count[g][1]);
        r.fpr_by_group[g] = static_cast<double>(positive[g][0]) / static_cast<double>(count[g][0]);
    }
    r.eo_violation = std::abs(r.tpr_by_group[0] - r.tpr_by_group[1]) +
                     std::abs(r.fpr_by_group[0] - r.fpr_by_group[1]);
    r.equal_outcomes = r.eo_violation <= epsilon;
    return r;
}

// ============================================================================
// UTILIZATION
// ============================================================================

UtilizationReport utilization(const std::vector<EvaluationRecord>& records) {
    if (records.empty()) {
        throw UndefinedMetricError("no proxy-positives: utilization is undefined");
    }
    std::array<std::size_t, 2> members{0, 0};
    std::array<std::size_t, 2> false_pos{0, 0};
    std::size_t agree = 0;
    for (const auto& rec : records) {
        if (rec.y_pt != 1) {
            throw DomainViolation("utilization record " + rec.id + " is not a proxy-positive");
        }
        if (rec.grp != 0 && rec.grp != 1) throw DomainViolation("group must be 0 or 1");
        if (rec.y_tt != 0 && rec.y_tt != 1) throw DomainViolation("y_tt must be binary");
        const bool same = rec.y_pt == rec.y_tt;
        agree += same;
        members[rec.grp] += 1;
        false_pos[rec.grp] += !same;
    }
    UtilizationReport r;
    r.m = records.size();
    r.zeta = static_cast<double>(agree) / static_cast<double>(r.m);
    r.true_positive_share = r.zeta;
    r.false_positive_share = static_cast<double>(r.m - agree) / static_cast<double>(r.m);
    const std::size_t fp_total = false_pos[0] + false_pos[1];
    for (int g = 0; g < 2; ++g) {
        if (members[g] > 0) {
            r.per_group_fp_share[g] =
                static_cast<double>(false_pos[g]) / static_cast<double>(members[g]);
        }
        if (fp_total > 0) {
            r.fp_composition[g] = static_cast<double>(false_pos[g]) / static_cast<double>(fp_total);
        }
    }
    return r;
}

// ============================================================================
// PROXY GAPS
// ============================================================================

std::string normalize_feature_name(const std::string& name) {
    std::string out;
    bool pending_sep = false;
    for (char c : name) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isspace(uc) || c == '_') {
            pending_sep = !out.empty();
            continue;
        }
        if (pending_sep) out.push_back(' ');
        pending_sep = false;
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

std::vector<std::optional<std::size_t>> match_features(
    const std::vector<std::string>& proxy_features,
    const std::vector<std::string>& intended_features) {
    std::unordered_set<std::string> seen;
    for (const auto& f : intended_features) {
        if (!seen.insert(normalize_feature_name(f)).second) {
            throw DomainViolation("duplicate intended feature name: " + f);
        }
    }
    std::unordered_map<std::string, std::size_t> proxy_index;
    for (std::size_t j = 0; j < proxy_features.size(); ++j) {
        proxy_index.emplace(normalize_feature_name(proxy_features[j]), j);  // first wins
    }
    std::vector<std::optional<std::size_t>> out;
    out.reserve(intended_features.size());
    for (const auto& f : intended_features) {
        auto it = proxy_index.find(normalize_feature_name(f));
        out.push_back(it == proxy_index.end() ? std::nullopt : std::optional{it->second});
    }
    return out;
}

std::vector<int> feature_proxy_gap(const std::vector<std::string>& proxy_features,
                                   const std::vector<std::string>& intended_features) {
    if (intended_features.empty()) throw DomainViolation("intended feature list is empty");
    std::vector<int> gap;
    for (const auto& m : match_features(proxy_features, intended_features)) {
        gap.push_back(m.has_value() ? 0 : 1);
    }
    return gap;
}

Vec label_proxy_gap(std::span<const double> omega_p, std::span<const double> omega_t,
                    const std::vector<std::optional<std::size_t>>& matching) {
    if (matching.size() != omega_t.size()) {
        throw DimensionError("matching length differs from intended importance length");
    }
    Vec gap(omega_t.size());
    for (std::size_t i = 0; i < omega_t.size(); ++i) {
        gap[i] = omega_t[i];
        if (!matching[i]) continue;
        const std::size_t j = *matching[i];
        if (j >= omega_p.size()) {
            throw DimensionError("matching index " + std::to_string(j) + " out of range");
        }
        if (sign(omega_t[i]) == sign(omega_p[j])) gap[i] = omega_t[i] - omega_p[j];
    }
    return gap;
}

ObstacleGap obstacle_gap(const NamedObstacleModel& proxy, const NamedObstacleModel& intended) {
    std::unordered_map<std::string, double> proxy_affected;
    for (std::size_t j : proxy.model.affected_features) {
        proxy_affected.emplace(normalize_feature_name(proxy.feature_names.at(j)),
                               proxy.model.alpha.at(j));
    }
    ObstacleGap gap;
    for (std::size_t i : intended.model.affected_features) {
        auto it = proxy_affected.find(normalize_feature_name(intended.feature_names.at(i)));
        if (it == proxy_affected.end()) {
            gap.unmatched_affected_features += 1;
        } else {
            gap.alpha_l1_distance_on_matched += std::abs(intended.model.alpha.at(i) - it->second);
        }
    }
    return gap;
}

GapReport proxy_gaps(const std::vector<std::string>& proxy_features, std::span<const double> omega_p,
                     const std::vector<std::string>& intended_features,
                     std::span<const double> omega_t, const NamedObstacleModel& proxy_obstacles,
                     const NamedObstacleModel& intended_obstacles) {
    if (omega_p.size() != proxy_features.size() || omega_t.size() != intended_features.size()) {
        throw DimensionError("importance vectors must match their feature lists");
    }
    GapReport r;
    const auto matching = match_features(proxy_features, intended_features);
    r.gamma_x = feature_proxy_gap(proxy_features, intended_features);
    r.gamma_l = label_proxy_gap(omega_p, omega_t, matching);
    r.obstacle_gap = obstacle_gap(proxy_obstacles, intended_obstacles);
    return r;
}

bool is_zero_vector(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// ============================================================================
// EQUITY SCORE
// ============================================================================

double equity_score(double psi, double omega, double zeta) {
    return psi + (1.0 - std::min(omega, 1.0)) + zeta;
}

double equity_score(const AccessReport& access, const OutcomeReport& outcome,
                    const UtilizationReport& util) {
    return equity_score(access.psi, outcome.eo_violation, util.zeta);
}

EquityReport make_equity_report(AccessReport access, OutcomeReport outcome,
                                UtilizationReport util, std::optional<GapReport> gaps) {
    EquityReport r{std::move(access), std::move(outcome), std::move(util), std::move(gaps), 0.0};
    r.score = equity_score(r.access, r.outcome, r.utilization);
    return r;
}

// ============================================================================
// JSON
// ============================================================================

void to_json(nlohmann::json& j, const AccessReport& r) {
    j = {{"psi", r.psi},
         {"per_individual", r.per_individual},
         {"per_group", group_map_json(r.per_group)}};
}

void from_json(const nlohmann::json& j, AccessReport& r) {
    r.psi = j.at("psi").get<double>();
    r.per_individual = j.at("per_individual").get<std::vector<bool>>();
    r.per_group = group_map_from_json(j.at("per_group"));
}

void to_json(nlohmann::json& j, const OutcomeReport& r) {
    j = {{"eo_violation", r.eo_violation},
         {"tpr_by_group", group_map_json(r.tpr_by_group)},
         {"fpr_by_group", group_map_json(r.fpr_by_group)},
         {"equal_outcomes", r.equal_outcomes}};
}

void from_json(const nlohmann::json& j, OutcomeReport& r) {
    r.eo_violation = j.at("eo_violation").get<double>();
    r.tpr_by_group = group_map_from_json(j.at("tpr_by_group"));
    r.fpr_by_group = group_map_from_json(j.at("fpr_by_group"));
    r.equal_outcomes = j.at("equal_outcomes").get<bool>();
}

void to_json(nlohmann::json& j, const UtilizationReport& r) {
    j = {{"zeta", r.zeta},
         {"m", r.m},
         {"true_positive_share", r.true_positive_share},
         {"false_positive_share", r.false_positive_share},
         {"per_group_fp_share", group_map_json(r.per_group_fp_share)},
         {"fp_composition", group_map_json(r.fp_composition)}};
}

void from_json(const nlohmann::json& j, UtilizationReport& r) {
    r.zeta = j.at("zeta").get<double>();
    r.m = j.at("m").get<std::size_t>();
    r.true_positive_share = j.at("true_positive_share").get<double>();
    r.false_positive_share = j.at("false_positive_share").get<double>();
    r.per_group_fp_share = group_map_from_json(j.at("per_group_fp_share"));
    r.fp_composition = group_map_from_json(j.value("fp_composition", nlohmann::json::object()));
}

void to_json(nlohmann::json& j, const ObstacleGap& r) {
    j = {{"unmatched_affected_features", r.unmatched_affected_features},
         {"alpha_l1_distance_on_matched", r.alpha_l1_distance_on_matched}};
}

void from_json(const nlohmann::json& j, ObstacleGap& r) {
    r.unmatched_affected_features = j.at("unmatched_affected_features").get<std::size_t>();
    r.alpha_l1_distance_on_matched = j.at("alpha_l1_distance_on_matched").get<double>();
}

void to_json(nlohmann::json& j, const GapReport& r) {
    j = {{"gamma_x", r.gamma_x}, {"gamma_l", r.gamma_l}, {"obstacle_gap", r.obstacle_gap}};
}

void from_json(const nlohmann::json& j, GapReport& r) {
    r.gamma_x = j.at("gamma_x").get<std::vector<int>>();
    r.gamma_l = j.at("gamma_l").get<Vec>();
    r.obstacle_gap = j.at("obstacle_gap").get<ObstacleGap>();
}

void to_json(nlohmann::json& j, const EquityReport& r) {
    j = {{"access", r.access},
         {"outcome", r.outcome},
         {"utilization", r.utilization},
         {"gaps", r.gaps ? nlohmann::json(*r.gaps) : nlohmann::json(nullptr)},
         {"score", r.score}};
}

void from_json(const nlohmann::json& j, EquityReport& r) {
    r.access = j.at("access").get<AccessReport>();
    r.outcome = j.at("outcome").get<OutcomeReport>();
    r.utilization = j.at("utilization").get<UtilizationReport>();
    if (j.contains("gaps") && !j.at("gaps").is_null()) r.gaps = j.at("gaps").get<GapReport>();
    r.score = j.at("score").get<double>();
}

}  // namespace equity
