#include "equity/case_study.hpp"

#include "equity/learner.hpp"
#include "equity/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace equity {

namespace {

struct FeatureRange {
    double lo, hi;
    bool ordinal;   // ordinal features move one step, continuous ones half an sd
};

double population_sd(const Vec& v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

int encode_sex(const std::string& s, std::size_t row) {
    if (s == "F") return 1;
    if (s == "M") return 0;
    throw DataError("row " + std::to_string(row + 1) + ", column 'sex': unknown level '" + s + "'");
}

Vec to_vec(const std::vector<int>& v) { return Vec(v.begin(), v.end()); }

Vec yes_no_column(const StudentTable& t, const std::string& col) {
    const auto& text = t.text(col);
    Vec out(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        try {
            out[i] = encode_yes_no(text[i]);
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(i + 1) + ", column '" + col + "': " + e.what());
        }
    }
    return out;
}

// Builds a view from named columns, uplifting the affected ones for flagged students.
Population assemble(const std::vector<std::string>& names, const std::vector<Vec>& columns,
                    const std::vector<std::string>& affected,
                    const std::map<std::string, FeatureRange>& ranges, const std::vector<bool>& flags,
                    const std::vector<int>& groups, const std::vector<int>& labels) {
    const std::size_t n = flags.size();
    Population pop;
    pop.feature_names = names;
    pop.group_name = "sex";
    pop.individuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Individual& ind = pop.individuals[i];
        ind.id = "s" + std::to_string(i + 1);
        ind.grp = groups[i];
        ind.y = ind.y_prime = labels[i];
        ind.x.resize(names.size());
        for (std::size_t k = 0; k < names.size(); ++k) ind.x[k] = columns[k][i];
        ind.z = ind.x;
    }
    for (const auto& name : affected) {
        const std::size_t k = static_cast<std::size_t>(
            std::find(names.begin(), names.end(), name) - names.begin());
        const FeatureRange& r = ranges.at(name);
        const double step = r.ordinal ? 1.0 : 0.5 * population_sd(columns[k]);
        for (std::size_t i = 0; i < n; ++i) {
            if (!flags[i]) continue;
            Individual& ind = pop.individuals[i];
            ind.z[k] = std::clamp(ind.x[k] + step, r.lo, std::max(r.hi, ind.x[k]));
        }
    }
    return pop;
}

std::set<std::size_t> indices_of(const std::vector<std::string>& names, const std::vector<std::string>& subset) {
    std::set<std::size_t> out;
    for (const auto& s : subset) {
        out.insert(static_cast<std::size_t>(std::find(names.begin(), names.end(), s) - names.begin()));
    }
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double rate_or_nan(const std::map<int, double>& m, int g) {
    const auto it = m.find(g);
    return it == m.end() ? std::nan("") : it->second;
}

ModelSpec logistic_spec(std::string name, const std::vector<std::string>& features) {
    ModelSpec s;
    s.name = std::move(name);
    s.feature_names = features;
    return s;
}

}  // namespace

// ============================================================================
// VIEWS
// ============================================================================

const std::vector<std::string>& case_study_proxy_features() {
    static const std::vector<std::string> f{"sex",    "test_scores",           "essay",
                                            "grades", "letter_of_recommendation", "extracurricular"};
    return f;
}

const std::vector<std::string>& case_study_intended_features() {
    static const std::vector<std::string> f{"sex",       "health",           "study_time",       "school_absences",
                                            "travel_time", "paid",           "free_time",        "romantic",
                                            "mothers_education", "fathers_education"};
    return f;
}

const std::vector<std::string>& case_study_proxy_affected() {
    static const std::vector<std::string> f{"test_scores", "essay", "grades"};
    return f;
}

const std::vector<std::string>& case_study_intended_affected() {
    static const std::vector<std::string> f{"health", "study_time", "school_absences", "free_time"};
    return f;
}

CaseStudyViews build_case_study_views(const StudentTable& raw, const RunConfig& cfg) {
    for (const auto& c : uci_required_columns()) {
        if (!raw.has(c)) throw DataError("missing expected column '" + c + "'");
    }
    const std::size_t n = raw.rows;

    std::vector<int> groups(n), labels(n);
    const auto& sex = raw.text("sex");
    const auto& g3 = raw.ints("G3");
    for (std::size_t i = 0; i < n; ++i) {
        groups[i] = encode_sex(sex[i], i);
        labels[i] = g3[i] >= cfg.pass_mark ? 1 : 0;
    }

    CaseStudyViews views;
    views.obstacle_flags = derive_obstacle_flags(raw);

    // Proxy columns.
    const auto& g1 = raw.ints("G1");
    const auto& g2 = raw.ints("G2");
    const auto& studytime = raw.ints("studytime");
    const auto& famrel = raw.ints("famrel");
    Vec test_scores(n), essay(n), extracurricular(n);
    std::mt19937_64 essay_rng(cfg.seed);
    std::normal_distribution<double> essay_noise(0.0, 1.5);
    for (std::size_t i = 0; i < n; ++i) {
        test_scores[i] = 0.5 * (g1[i] + g2[i]);
        const double base = 10.0 * (studytime[i] - 1) / 3.0 + 10.0 * (famrel[i] - 1) / 4.0;
        essay[i] = std::clamp(base + essay_noise(essay_rng), 0.0, 20.0);
    }
    if (raw.has("activities")) {
        extracurricular = yes_no_column(raw, "activities");
    } else {
        std::mt19937_64 act_rng(cfg.seed + 1);
        std::bernoulli_distribution coin(0.5);
        for (auto& e : extracurricular) e = coin(act_rng) ? 1.0 : 0.0;
    }
    const std::vector<Vec> proxy_cols{to_vec(groups), test_scores, essay, to_vec(g1),
                                      to_vec(famrel), extracurricular};

    // Intended columns; absences are negated so that larger is better.
    Vec school_absences(n);
    const auto& absences = raw.ints("absences");
    for (std::size_t i = 0; i < n; ++i) school_absences[i] = -static_cast<double>(absences[i]);
    const std::vector<Vec> intended_cols{to_vec(groups),
                                         to_vec(raw.ints("health")),
                                         to_vec(studytime),
                                         school_absences,
                                         to_vec(raw.ints("traveltime")),
                                         yes_no_column(raw, "paid"),
                                         to_vec(raw.ints("freetime")),
                                         yes_no_column(raw, "romantic"),
                                         to_vec(raw.ints("Medu")),
                                         to_vec(raw.ints("Fedu"))};

    const std::map<std::string, FeatureRange> ranges{
        {"test_scores", {0.0, 20.0, false}}, {"essay", {0.0, 20.0, false}},   {"grades", {0.0, 20.0, true}},
        {"health", {1.0, 5.0, true}},        {"study_time", {1.0, 4.0, true}}, {"free_time", {1.0, 5.0, true}},
        {"school_absences", {-std::numeric_limits<double>::infinity(), 0.0, false}}};

    views.proxy_view = assemble(case_study_proxy_features(), proxy_cols, case_study_proxy_affected(), ranges,
                                views.obstacle_flags, groups, labels);
    views.intended_view = assemble(case_study_intended_features(), intended_cols,
                                   case_study_intended_affected(), ranges, views.obstacle_flags, groups, labels);
    views.proxy_obstacles = ObstacleModel::on_features(
        views.proxy_view.dim(), indices_of(case_study_proxy_features(), case_study_proxy_affected()));
    views.intended_obstacles = ObstacleModel::on_features(
        views.intended_view.dim(), indices_of(case_study_intended_features(), case_study_intended_affected()));
    views.proxy_view.validate();
    views.intended_view.validate();
    return views;
}

// ============================================================================
// PIPELINE
// ============================================================================

const RegimeResult& CaseStudyResult::find(const RegimeFlags& flags) const {
    for (const auto& r : regimes) {
        if (r.flags == flags) return r;
    }
    throw DomainViolation("regime " + flags.name() + " was not run");
}

CaseStudyResult run_case_study(const CaseStudyViews& views, const RunConfig& cfg) {
    cfg.validate();
    const Population& pv = views.proxy_view;
    const Population& iv = views.intended_view;
    if (pv.size() != iv.size()) throw DimensionError("proxy and intended views differ in length");
    if (pv.size() < 4) throw DataError("case study needs at least four students");

    const auto [train_idx, test_idx] = train_test_split(pv.size(), cfg.train_fraction, cfg.seed);

    // The intended model describes the environment: it learns from the
    // obstacle-free intended view of the training students.
    Matrix it_rows;
    Labels it_labels;
    for (std::size_t i : train_idx) {
        it_rows.push_back(iv.individuals[i].z);
        it_labels.push_back(iv.individuals[i].y_prime);
    }
    const TrainedModel intended = train(logistic_spec("performance", iv.feature_names), it_rows, it_labels,
                                        cfg.seed);

    // The proxy model is fitted to historical records gathered without any
    // alleviation policy; policies act on the cohort being decided.
    Matrix pt_rows;
    Labels pt_labels;
    for (std::size_t i : train_idx) {
        pt_rows.push_back(pv.individuals[i].x);
        pt_labels.push_back(pv.individuals[i].y);
    }
    const TrainedModel proxy = train(logistic_spec("admissibility", pv.feature_names), pt_rows, pt_labels,
                                     cfg.seed);

    const NamedObstacleModel proxy_named{views.proxy_obstacles, pv.feature_names};
    const NamedObstacleModel intended_named{views.intended_obstacles, iv.feature_names};

    CaseStudyResult result;
    result.students = pv.size();
    result.flagged = static_cast<std::size_t>(
        std::count(views.obstacle_flags.begin(), views.obstacle_flags.end(), true));
    result.test_size = test_idx.size();
    result.proxy_model = proxy;
    result.intended_model = intended;
    result.proxy_obstacles = proxy_named;
    result.intended_obstacles = intended_named;

    const std::vector<RegimeFlags> regimes =
        cfg.regime ? std::vector<RegimeFlags>{*cfg.regime} : all_regime_flags();
    const Policy alleviate{cfg.alleviation_delta};

    for (const RegimeFlags& flags : regimes) {
        RegimeResult rr;
        rr.flags = flags;
        const Policy access_policy = flags.equal_access ? alleviate : Policy::no_alleviation();
        const Policy util_policy = flags.equal_utilization ? alleviate : Policy::no_alleviation();
        try {
            const AccessReport access = model_access(pv, views.proxy_obstacles, access_policy);

            Vec scores;
            Labels te_labels;
            std::vector<int> te_groups;
            std::vector<bool> te_accessed;
            for (std::size_t i : test_idx) {
                const RevealedPair r = reveal(pv.individuals[i], views.proxy_obstacles, access_policy);
                scores.push_back(score(proxy, r.x_rev));
                te_labels.push_back(r.y_rev);
                te_groups.push_back(pv.individuals[i].grp);
                te_accessed.push_back(r.fully_accessed);
            }
            if (flags.equal_outcome) {
                rr.thresholds = fit_group_thresholds(scores, te_labels, te_groups, cfg.tau_o,
                                                     cfg.threshold_quantiles);
            } else {
                rr.thresholds.cut = {proxy.spec.hyperparams.decision_threshold,
                                      proxy.spec.hyperparams.decision_threshold};
            }
            const Labels preds = apply_group_thresholds(rr.thresholds, scores, te_groups);
            const OutcomeReport outcome = eo_violation(preds, te_labels, te_groups, cfg.epsilon);
            rr.thresholds.eo_violation = outcome.eo_violation;

            std::array<double, 2> admitted{0, 0}, members{0, 0};
            std::vector<EvaluationRecord> records;
            for (std::size_t k = 0; k < test_idx.size(); ++k) {
                const auto g = static_cast<std::size_t>(te_groups[k]);
                members[g] += 1;
                if (preds[k] != 1) continue;
                admitted[g] += 1;
                Individual evaluated = iv.individuals[test_idx[k]];
                if (flags.equal_access && te_accessed[k]) {
                    // Part of the intended-view obstacle stems from the same
                    // causes as the access obstacles and goes with them.
                    for (std::size_t f = 0; f < evaluated.x.size(); ++f) {
                        const double lifted = evaluated.x[f] + cfg.access_resurfacing * (evaluated.z[f] - evaluated.x[f]);
                        evaluated.x[f] = std::min(evaluated.z[f], lifted);
                    }
                }
                const RevealedPair tr = reveal(evaluated, views.intended_obstacles, util_policy);
                records.push_back({evaluated.id, evaluated.grp, 1, predict(intended, tr.x_rev)});
            }
            for (std::size_t g = 0; g < 2; ++g) {
                rr.positive_rate[g] = members[g] > 0 ? admitted[g] / members[g] : std::nan("");
            }
            const UtilizationReport util = utilization(records);
            GapReport gaps = proxy_gaps(pv.feature_names, proxy.importance, iv.feature_names, intended.importance,
                                        proxy_named, intended_named);
            rr.report = make_equity_report(access, outcome, util, std::move(gaps));
        } catch (const UndefinedMetricError& e) {
            rr.error = e.what();
        } catch (const DomainViolation& e) {
            rr.error = e.what();
        }
        result.regimes.push_back(std::move(rr));
    }
    return result;
}

CaseStudyResult run_case_study(const RunConfig& cfg) {
    if (cfg.input.empty()) throw DataError("no student file given");
    const StudentTable raw = load_uci_students(cfg.input, cfg.delimiter());
    return run_case_study(build_case_study_views(raw, cfg), cfg);
}

// ============================================================================
// TABLES
// ============================================================================

std::string admissibility_table_csv(const CaseStudyResult& r) {
    std::ostringstream os;
    os << "regime,group,positive_rate\n";
    for (const auto& rr : r.regimes) {
        for (int g = 0; g < 2; ++g) {
            os << rr.name() << ',' << (g == 0 ? "M" : "F") << ',' << fmt(rr.positive_rate[static_cast<std::size_t>(g)])
               << '\n';
        }
    }
    return os.str();
}

std::string eo_table_csv(const CaseStudyResult& r) {
    std::ostringstream os;
    os << "regime,eo_violation,tpr_g0,tpr_g1,fpr_g0,fpr_g1\n";
    for (const auto& rr : r.regimes) {
        if (!rr.report) {
            os << rr.name() << ",nan,nan,nan,nan,nan\n";
            continue;
        }
        const auto& o = rr.report->outcome;
        os << rr.name() << ',' << fmt(o.eo_violation) << ',' << fmt(rate_or_nan(o.tpr_by_group, 0)) << ','
           << fmt(rate_or_nan(o.tpr_by_group, 1)) << ',' << fmt(rate_or_nan(o.fpr_by_group, 0)) << ','
           << fmt(rate_or_nan(o.fpr_by_group, 1)) << '\n';
    }
    return os.str();
}

std::string utilization_table_csv(const CaseStudyResult& r) {
    std::ostringstream os;
    os << "regime,tp_share,fp_share,fp_share_g0,fp_share_g1,fp_composition_g0,fp_composition_g1\n";
    for (const auto& rr : r.regimes) {
        if (!rr.report) {
            os << rr.name() << ",nan,nan,nan,nan,nan,nan\n";
            continue;
        }
        const auto& u = rr.report->utilization;
        os << rr.name() << ',' << fmt(u.true_positive_share) << ',' << fmt(u.false_positive_share) << ','
           << fmt(rate_or_nan(u.per_group_fp_share, 0)) << ',' << fmt(rate_or_nan(u.per_group_fp_share, 1)) << ','
           << fmt(rate_or_nan(u.fp_composition, 0)) << ',' << fmt(rate_or_nan(u.fp_composition, 1)) << '\n';
    }
    return os.str();
}

nlohmann::json model_document(const TrainedModel& model, const NamedObstacleModel& obstacles) {
    nlohmann::json j = model;
    nlohmann::json alpha = nlohmann::json::object();
    for (std::size_t k : obstacles.model.affected_features) {
        alpha[obstacles.feature_names.at(k)] = obstacles.model.alpha.at(k);
    }
    j["obstacle_alpha"] = alpha;
    return j;
}

void to_json(nlohmann::json& j, const RegimeResult& r) {
    auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
    j = {{"regime", r.name()},
         {"equal_access", r.flags.equal_access},
         {"equal_outcome", r.flags.equal_outcome},
         {"equal_utilization", r.flags.equal_utilization},
         {"positive_rate", {{"0", num(r.positive_rate[0])}, {"1", num(r.positive_rate[1])}}},
         {"thresholds", {{"0", r.thresholds.cut[0]}, {"1", r.thresholds.cut[1]}}}};
    if (r.report) {
        j["report"] = *r.report;
    } else {
        j["error"] = r.error;
    }
}

void to_json(nlohmann::json& j, const CaseStudyResult& r) {
    j = {{"students", r.students}, {"flagged", r.flagged}, {"test_size", r.test_size}, {"regimes", r.regimes}};
}

}  // namespace equity
