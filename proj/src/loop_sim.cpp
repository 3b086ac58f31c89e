#include "equity/loop_sim.hpp"

#include "equity/metrics.hpp"
#include "equity/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace equity {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec ones_if_empty(const Vec& v, std::size_t d) { return v.empty() ? Vec(d, 1.0) : v; }

std::mt19937_64 round_rng(std::uint64_t seed, std::uint64_t round) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(round), static_cast<std::uint32_t>(round >> 32)};
    return std::mt19937_64(seq);
}

double dot(const Vec& w, const Vec& v, std::size_t offset) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * v[offset + k];
    return s;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

nlohmann::json nan_to_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace

// ============================================================================
// CONFIG
// ============================================================================

void SyntheticConfig::validate() const {
    if (n_per_round == 0) throw DomainViolation("n_per_round must be >= 1");
    if (d_proxy == 0 || d_intended == 0) throw DomainViolation("feature dimensions must be >= 1");
    if (!(group_fraction > 0.0 && group_fraction < 1.0)) {
        throw DomainViolation("group_fraction must lie in (0, 1)");
    }
    for (double p : obstacle_prob_by_group) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainViolation("obstacle probabilities must lie in [0, 1]");
    }
    if (!(obstacle_severity >= 0.0)) throw DomainViolation("obstacle_severity must be >= 0");
    if (!(label_noise >= 0.0 && label_noise < 0.5)) {
        throw DomainViolation("label_noise must lie in [0, 0.5)");
    }
    if (!(feature_correlation >= 0.0 && feature_correlation <= 1.0)) {
        throw DomainViolation("feature_correlation must lie in [0, 1]");
    }
    for (double p : utilization_obstacle_prob_by_group) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainViolation("obstacle probabilities must lie in [0, 1]");
    }
    auto check_len = [](const Vec& v, std::size_t d, const char* what) {
        if (!v.empty() && v.size() != d) {
            throw DimensionError(std::string(what) + " has length " + std::to_string(v.size()) +
                                 ", expected " + std::to_string(d));
        }
    };
    check_len(alpha_proxy, d_proxy, "alpha_proxy");
    check_len(alpha_intended, d_intended, "alpha_intended");
    check_len(true_proxy_coefficients, d_proxy, "true_proxy_coefficients");
    check_len(true_intended_coefficients, d_intended, "true_intended_coefficients");
    for (double a : resolved_alpha_proxy()) {
        if (!(a >= 0.0)) throw DomainViolation("alpha_proxy must be >= 0");
    }
    for (double a : resolved_alpha_intended()) {
        if (!(a >= 0.0)) throw DomainViolation("alpha_intended must be >= 0");
    }
}

Vec SyntheticConfig::resolved_alpha_proxy() const { return ones_if_empty(alpha_proxy, d_proxy); }
Vec SyntheticConfig::resolved_alpha_intended() const {
    return ones_if_empty(alpha_intended, d_intended);
}

std::vector<std::string> synthetic_feature_names(const SyntheticConfig& cfg) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < cfg.d_proxy; ++k) names.push_back("p" + std::to_string(k));
    for (std::size_t k = 0; k < cfg.d_intended; ++k) names.push_back("t" + std::to_string(k));
    if (cfg.group_as_feature) names.emplace_back("grp");
    return names;
}

std::vector<std::string> proxy_feature_names(const SyntheticConfig& cfg) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < cfg.d_proxy; ++k) names.push_back("p" + std::to_string(k));
    if (cfg.group_as_feature) names.emplace_back("grp");
    return names;
}

std::vector<std::string> intended_feature_names(const SyntheticConfig& cfg) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < cfg.d_intended; ++k) names.push_back("t" + std::to_string(k));
    if (cfg.group_as_feature) names.emplace_back("grp");
    return names;
}

ObstacleModel proxy_obstacle_model(const SyntheticConfig& cfg) {
    ObstacleModel m = ObstacleModel::none(synthetic_feature_names(cfg).size());
    const Vec a = cfg.resolved_alpha_proxy();
    for (std::size_t k = 0; k < cfg.d_proxy; ++k) {
        m.alpha[k] = a[k];
        if (a[k] > 0.0) m.affected_features.insert(k);
    }
    return m;
}

ObstacleModel intended_obstacle_model(const SyntheticConfig& cfg) {
    ObstacleModel m = ObstacleModel::none(synthetic_feature_names(cfg).size());
    const Vec a = cfg.resolved_alpha_intended();
    for (std::size_t k = 0; k < cfg.d_intended; ++k) {
        m.alpha[cfg.d_proxy + k] = a[k];
        if (a[k] > 0.0) m.affected_features.insert(cfg.d_proxy + k);
    }
    return m;
}

// ============================================================================
// GENERATION
// ============================================================================

SyntheticCohort generate_cohort(const SyntheticConfig& cfg, std::uint64_t round) {
    cfg.validate();
    const auto names = synthetic_feature_names(cfg);
    const std::size_t d = names.size();
    const std::size_t dp = cfg.d_proxy, dt = cfg.d_intended;
    const Vec ap = cfg.resolved_alpha_proxy();
    const Vec at = cfg.resolved_alpha_intended();
    const Vec wp = ones_if_empty(cfg.true_proxy_coefficients, dp);
    const Vec wt = ones_if_empty(cfg.true_intended_coefficients, dt);
    const double rho = cfg.feature_correlation;
    const double resid = std::sqrt(1.0 - rho * rho);

    auto rng = round_rng(cfg.seed, round);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto degradation = [&] { return cfg.obstacle_severity * (0.5 + unif(rng)); };

    SyntheticCohort cohort;
    Population& pop = cohort.population;
    pop.feature_names = names;
    pop.group_name = "grp";
    pop.individuals.reserve(cfg.n_per_round);
    cohort.resurfaced.reserve(cfg.n_per_round);
    for (std::size_t i = 0; i < cfg.n_per_round; ++i) {
        Individual ind;
        ind.id = "r" + std::to_string(round) + "-" + std::to_string(i);
        ind.grp = unif(rng) < cfg.group_fraction ? 1 : 0;
        const double latent = normal(rng);
        ind.z.assign(d, 0.0);
        for (std::size_t k = 0; k < dp + dt; ++k) ind.z[k] = rho * latent + resid * normal(rng);
        if (cfg.group_as_feature) ind.z[d - 1] = ind.grp;
        ind.x = ind.z;
        Vec resurfaced(d, 0.0);

        // Every draw is taken regardless of incidence so streams stay aligned.
        const bool access_obstacle = unif(rng) < cfg.obstacle_prob_by_group[ind.grp];
        const bool util_obstacle = unif(rng) < cfg.utilization_obstacle_prob_by_group[ind.grp];
        for (std::size_t k = 0; k < dp; ++k) {
            const double draw = degradation();
            if (access_obstacle && ap[k] > 0.0) ind.x[k] -= draw;
        }
        for (std::size_t k = dp; k < dp + dt; ++k) {
            const double carried = degradation();
            const double own = degradation();
            if (at[k - dp] <= 0.0) continue;
            if (access_obstacle) {
                ind.x[k] -= carried;
                resurfaced[k] = carried;
            }
            if (util_obstacle) ind.x[k] -= own;
        }

        const bool flip = unif(rng) < cfg.label_noise;
        const double s_free = dot(wp, ind.z, 0) + dot(wt, ind.z, dp);
        const double s_obst = dot(wp, ind.x, 0) + dot(wt, ind.x, dp);
        ind.y_prime = (s_free > 0.0) != flip ? 1 : 0;
        ind.y = (s_obst > 0.0) != flip ? 1 : 0;
        pop.individuals.push_back(std::move(ind));
        cohort.resurfaced.push_back(std::move(resurfaced));
    }
    return cohort;
}

Population generate_population(const SyntheticConfig& cfg, std::uint64_t round) {
    return generate_cohort(cfg, round).population;
}

// ============================================================================
// CURATION
// ============================================================================

void CuratedDataset::append(const CuratedDataset& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::size_t CuratedDataset::count_round(std::uint64_t round) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](const CuratedRow& r) { return r.round == round; }));
}

CuratedDataset curate_ground_truth(const std::vector<CurationInput>& positives,
                                   std::uint64_t round) {
    CuratedDataset out;
    out.rows.reserve(positives.size());
    for (const auto& p : positives) {
        if (p.y_pt != 1) continue;  // proxy-negatives are never evaluated
        out.rows.push_back(CuratedRow{p.id, round, p.grp, p.proxy_features, p.y_tt});
    }
    return out;
}

// ============================================================================
// LOOP
// ============================================================================

std::string to_string(Regime r) {
    switch (r) {
        case Regime::no_equity: return "no_equity";
        case Regime::access_only: return "access_only";
        case Regime::access_and_outcome: return "access_and_outcome";
        case Regime::full_equity: return "full_equity";
    }
    return "unknown";
}

Regime regime_from_string(const std::string& s) {
    if (s == "no_equity") return Regime::no_equity;
    if (s == "access_only") return Regime::access_only;
    if (s == "access_and_outcome") return Regime::access_and_outcome;
    if (s == "full_equity") return Regime::full_equity;
    throw DataError("unknown regime: " + s);
}

LoopTrajectory run_inequity_loop(const SyntheticConfig& cfg, std::size_t rounds, Regime regime,
                                 const LoopOptions& opts) {
    cfg.validate();
    if (rounds == 0) throw DomainViolation("rounds must be >= 1");

    const auto pnames = proxy_feature_names(cfg);
    const auto tnames = intended_feature_names(cfg);
    const bool alleviate_access = regime != Regime::no_equity;
    const bool equalize_outcomes =
        regime == Regime::access_and_outcome || regime == Regime::full_equity;
    const bool alleviate_utilization = regime == Regime::full_equity;
    const Policy access_policy = alleviate_access ? Policy::full_alleviation() : Policy::no_alleviation();
    const Policy util_policy =
        alleviate_utilization ? Policy::full_alleviation() : Policy::no_alleviation();

    const Population round0 = generate_population(cfg, 0);
    const ObstacleModel om_p = project(proxy_obstacle_model(cfg), round0, pnames);
    const ObstacleModel om_t = project(intended_obstacle_model(cfg), round0, tnames);

    // The intended model depicts the environment: fitted on obstacle-free values.
    const Population intended0 = project(round0, tnames);
    Matrix t_rows;
    Labels t_labels;
    for (const auto& ind : intended0.individuals) {
        t_rows.push_back(ind.z);
        t_labels.push_back(ind.y_prime);
    }
    const ModelSpec t_spec{"intended", tnames, FunctionClass::logistic_regression, opts.learner};
    const TrainedModel intended_model = train(t_spec, t_rows, t_labels, cfg.seed);

    LoopTrajectory traj;
    traj.regime = regime;
    // Historical ground truth: obstacle-free proxy features with their labels.
    for (const auto& ind : project(round0, pnames).individuals) {
        traj.curated.rows.push_back(CuratedRow{ind.id, 0, ind.grp, ind.z, ind.y_prime});
    }
    traj.seed_size = traj.curated.size();

    const ModelSpec p_spec{"proxy", pnames, FunctionClass::logistic_regression, opts.learner};
    for (std::uint64_t r = 1; r <= rounds; ++r) {
        Matrix rows;
        Labels labels;
        rows.reserve(traj.curated.size());
        for (const auto& row : traj.curated.rows) {
            rows.push_back(row.features);
            labels.push_back(row.label);
        }
        TrainedModel proxy_model;
        try {
            proxy_model = train(p_spec, rows, labels, cfg.seed + r);
        } catch (const DomainViolation& e) {
            traj.events.push_back({r, std::string("proxy training skipped: ") + e.what()});
            continue;
        }

        const SyntheticCohort cohort = generate_cohort(cfg, r);
        const Population pc = project(cohort.population, pnames);
        const Population tc = project(cohort.population, tnames);
        const std::size_t t_offset = cfg.d_proxy;

        LoopRound rec;
        rec.round = r;
        rec.psi = model_access(pc, om_p, access_policy).psi;

        std::vector<RevealedPair> revealed;
        Vec scores;
        std::vector<int> y_rev, groups;
        for (const auto& ind : pc.individuals) {
            revealed.push_back(reveal(ind, om_p, access_policy));
            scores.push_back(score(proxy_model, revealed.back().x_rev));
            y_rev.push_back(revealed.back().y_rev);
            groups.push_back(ind.grp);
        }

        std::vector<int> preds;
        if (equalize_outcomes) {
            try {
                const auto t = fit_group_thresholds(scores, y_rev, groups, opts.tau_o);
                preds = apply_group_thresholds(t, scores, groups);
            } catch (const UndefinedMetricError& e) {
                traj.events.push_back({r, std::string("outcome equalisation skipped: ") + e.what()});
            }
        }
        if (preds.empty()) {
            const double cut = opts.learner.decision_threshold;
            for (double s : scores) preds.push_back(s >= cut ? 1 : 0);
        }

        try {
            rec.omega = eo_violation(preds, y_rev, groups).eo_violation;
        } catch (const UndefinedMetricError& e) {
            rec.omega = kNaN;
            traj.events.push_back({r, e.what()});
        }

        std::array<std::size_t, 2> members{0, 0}, admitted{0, 0};
        std::vector<CurationInput> positives;
        std::vector<EvaluationRecord> evals;
        for (std::size_t i = 0; i < pc.size(); ++i) {
            const int g = groups[i];
            members[g] += 1;
            if (preds[i] != 1) continue;
            admitted[g] += 1;
            Individual evaluated = tc.individuals[i];
            if (alleviate_access) {
                for (std::size_t k = 0; k < cfg.d_intended; ++k) {
                    evaluated.x[k] = std::min(evaluated.z[k],
                                              evaluated.x[k] + cohort.resurfaced[i][t_offset + k]);
                }
            }
            const RevealedPair tr = reveal(evaluated, om_t, util_policy);
            const int y_tt = predict(intended_model, tr.x_rev);
            evals.push_back({pc.individuals[i].id, g, 1, y_tt});
            positives.push_back({pc.individuals[i].id, g, revealed[i].x_rev, 1, y_tt});
        }
        for (int g = 0; g < 2; ++g) {
            rec.pos_rate[g] = members[g] ? static_cast<double>(admitted[g]) / members[g] : kNaN;
        }
        rec.positives = evals.size();
        if (evals.empty()) {
            rec.zeta = kNaN;
            rec.fp_share = {kNaN, kNaN};
            traj.events.push_back({r, "no proxy-positives: utilization undefined"});
        } else {
            const UtilizationReport u = utilization(evals);
            rec.zeta = u.zeta;
            for (int g = 0; g < 2; ++g) {
                auto it = u.per_group_fp_share.find(g);
                rec.fp_share[g] = it == u.per_group_fp_share.end() ? kNaN : it->second;
            }
        }

        const CuratedDataset fresh = curate_ground_truth(positives, r);
        std::size_t pos = 0, pos_g1 = 0;
        for (const auto& row : fresh.rows) {
            pos += row.label == 1;
            pos_g1 += row.label == 1 && row.grp == 1;
        }
        rec.curated_positive_share_g1 = pos ? static_cast<double>(pos_g1) / pos : kNaN;
        traj.curated.append(fresh);
        rec.curated_size = traj.curated.size();
        traj.rounds.push_back(rec);
    }
    return traj;
}

std::string trajectory_csv(const std::vector<LoopTrajectory>& runs) {
    std::ostringstream os;
    os << "round,regime,psi,omega,zeta,pos_rate_g0,pos_rate_g1,fp_share_g0,fp_share_g1,curated_size\n";
    for (const auto& t : runs) {
        for (const auto& r : t.rounds) {
            os << r.round << ',' << to_string(t.regime) << ',' << format_double(r.psi) << ','
               << format_double(r.omega) << ',' << format_double(r.zeta) << ','
               << format_double(r.pos_rate[0]) << ',' << format_double(r.pos_rate[1]) << ','
               << format_double(r.fp_share[0]) << ',' << format_double(r.fp_share[1]) << ','
               << r.curated_size << '\n';
        }
    }
    return os.str();
}

void to_json(nlohmann::json& j, const LoopTrajectory& t) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : t.rounds) {
        rounds.push_back({{"round", r.round},
                          {"psi", r.psi},
                          {"omega", nan_to_null(r.omega)},
                          {"zeta", nan_to_null(r.zeta)},
                          {"pos_rate_g0", nan_to_null(r.pos_rate[0])},
                          {"pos_rate_g1", nan_to_null(r.pos_rate[1])},
                          {"fp_share_g0", nan_to_null(r.fp_share[0])},
                          {"fp_share_g1", nan_to_null(r.fp_share[1])},
                          {"curated_positive_share_g1", nan_to_null(r.curated_positive_share_g1)},
                          {"positives", r.positives},
                          {"curated_size", r.curated_size}});
    }
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : t.events) events.push_back({{"round", e.round}, {"reason", e.reason}});
    j = {{"regime", to_string(t.regime)},
         {"seed_size", t.seed_size},
         {"rounds", rounds},
         {"events", events}};
}

}  // namespace equity
