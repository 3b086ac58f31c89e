// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. With --case-study it runs only the
// student case study, which needs the UCI math file (exit 77 when absent).

#include "equity/case_study.hpp"
#include "equity/learner.hpp"
#include "equity/loop_sim.hpp"
#include "equity/metrics.hpp"
#include "equity/report.hpp"
#include "equity/scoring.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace equity;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << id << "  " << detail << '\n';
    if (!ok) ++failures;
}

void note(const std::string& text) { std::cout << "     note: " << text << '\n'; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int precision = 6) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

ObstacleModel weights(const Vec& alpha) {
    ObstacleModel m;
    m.alpha = alpha;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k] > 0.0) m.affected_features.insert(k);
    }
    return m;
}

// ---------------------------------------------------------------------------

void oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    gen::Rng r(20240601);
    double worst_psi = 0.0, worst_omega = 0.0, worst_zeta = 0.0;
    bool defined = true;
    for (int t = 0; t < 1000; ++t) {
        const auto n = static_cast<std::size_t>(r.integer(4, 50));
        const auto d = static_cast<std::size_t>(r.integer(1, 4));
        const Population pop = gen::population(r, n, d);
        const ObstacleModel om = weights(gen::alpha(r, d));
        const double delta = r.coin(0.2) ? std::numeric_limits<double>::infinity() : r.integer(0, 8) * 0.25;
        std::vector<Vec> z, x;
        for (const auto& ind : pop.individuals) {
            z.push_back(ind.z);
            x.push_back(ind.x);
        }
        worst_psi = std::max(worst_psi, std::fabs(model_access(pop, om, Policy{delta}).psi -
                                                  oracle::psi(z, x, om.alpha, delta)));

        const auto o = gen::outcomes(r, n);
        const auto expected = oracle::omega(o.pred, o.label, o.group);
        if (!expected) {
            defined = false;
            continue;
        }
        worst_omega = std::max(worst_omega, std::fabs(eo_violation(o.pred, o.label, o.group).eo_violation - *expected));

        std::vector<EvaluationRecord> recs;
        std::vector<int> ytt;
        for (std::size_t i = 0; i < n; ++i) {
            const int v = r.integer(0, 1);
            ytt.push_back(v);
            recs.push_back({"r" + std::to_string(i), o.group[i], 1, v});
        }
        worst_zeta = std::max(worst_zeta, std::fabs(utilization(recs).zeta - oracle::zeta(ytt)));
    }
    const double secs = seconds_since(t0);
    const bool ok = defined && worst_psi <= 1e-12 && worst_omega <= 1e-12 && worst_zeta <= 1e-12 && secs < 10.0;
    report("1 metric-oracle-equivalence", ok,
           "max |diff| psi " + num(worst_psi) + ", omega " + num(worst_omega) + ", zeta " + num(worst_zeta) +
               " over 1000 instances in " + num(secs, 3) + " s");
}

void access_outcome_example() {
    Population pop;
    pop.feature_names = {"f1", "f2"};
    Individual a;
    a.id = "a";
    a.grp = 1;
    a.x = {5, 0};
    a.z = {6, 0};
    a.y = a.y_prime = 1;
    Individual b;
    b.id = "b";
    b.grp = 0;
    b.x = b.z = {6, 0};
    b.y = b.y_prime = 1;
    pop.individuals = {a, b};
    const ObstacleModel om = weights({1, 1});

    const double psi_f1 = model_access(pop, om, Policy::full_alleviation()).psi;
    const double psi_f2 = model_access(pop, om, Policy::no_alleviation()).psi;

    ModelSpec s1{"equal_access", pop.feature_names, FunctionClass::norm_threshold, {}};
    s1.hyperparams.norm_threshold = 5.5;
    ModelSpec s2{"unequal_access", pop.feature_names, FunctionClass::norm_threshold, {}};
    s2.hyperparams.norm_threshold = 6.0;
    const TrainedModel f1 = train(s1, {{5, 0}, {6, 0}}, {0, 1}, 0);
    const TrainedModel f2 = train(s2, {{5, 0}, {6, 0}}, {0, 1}, 0);

    std::vector<int> p1, p2;
    for (const auto& ind : pop.individuals) {
        p1.push_back(predict(f1, reveal(ind, om, Policy::full_alleviation()).x_rev));
        p2.push_back(predict(f2, reveal(ind, om, Policy::no_alleviation()).x_rev));
    }
    // Both models are judged on what each individual revealed: a's revealed
    // (5,0) is a legitimate negative for f2 and a's (6,0) a positive for f1.
    std::vector<int> y1, y2;
    for (const auto& ind : pop.individuals) {
        y1.push_back(reveal(ind, om, Policy::full_alleviation()).x_rev[0] >= 6 ? 1 : 0);
        y2.push_back(reveal(ind, om, Policy::no_alleviation()).x_rev[0] >= 6 ? 1 : 0);
    }
    const bool same_outcomes = p1 == y1 && p2 == y2;
    const bool ok = psi_f1 == 1.0 && psi_f2 == 0.5 && psi_f2 < psi_f1 && same_outcomes;
    report("2 access-vs-outcome-example", ok,
           "psi(equal)=" + num(psi_f1) + " psi(unequal)=" + num(psi_f2) +
               "; both models classify every revealed input correctly");
}

void gap_fixtures() {
    const auto bail = feature_proxy_gap({"criminal history", "current crime", "age at arrest"},
                                        {"job", "support system", "financial stability"});
    const std::vector<std::string> hp{"code experience", "team player", "references", "gender", "race"};
    const std::vector<std::string> ht{"accomplished tasks", "team player", "manager ratings", "gender", "race"};
    const Vec w{0.5, 0.2, 0.2, 0.05, 0.05};
    const auto hx = feature_proxy_gap(hp, ht);
    const Vec hl = label_proxy_gap(normalize_importance(w), normalize_importance(w), match_features(hp, ht));
    const Vec expected{0.5, 0.0, 0.2, 0.0, 0.0};
    double err = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) err = std::max(err, std::fabs(hl[i] - expected[i]));
    const bool ok = bail == std::vector<int>{1, 1, 1} && hx == std::vector<int>{1, 0, 1, 0, 0} && err <= 1e-12;
    std::string gl;
    for (double v : hl) gl += (gl.empty() ? "" : ",") + num(v);
    report("3 gap-fixtures", ok, "bail gamma_x=(1,1,1); hiring gamma_x=(1,0,1,0,0), gamma_l=(" + gl + ")");
    note("the hiring example is sometimes quoted with 0.3 as the third label-gap entry; applying the "
         "definition to the stated weights gives 0.2 (unmatched 'manager ratings' keeps its own weight)");
}

void claim_property() {
    gen::Rng r(4242);
    const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f", "g"};
    int configs = 0, violations = 0, with_gap = 0;
    while (configs < 1000) {
        std::vector<std::string> names = pool;
        std::shuffle(names.begin(), names.end(), r.engine());
        std::vector<std::string> proxy(names.begin(), names.begin() + r.integer(1, 5));
        std::shuffle(names.begin(), names.end(), r.engine());
        std::vector<std::string> intended(names.begin(), names.begin() + r.integer(1, 5));
        Vec wp(proxy.size()), wt(intended.size());
        for (auto& v : wp) v = r.coin(0.15) ? 0.0 : r.normal(0, 1);
        for (auto& v : wt) v = (r.coin() ? 1.0 : -1.0) * r.uniform(0.01, 2.0);
        const Vec op = normalize_importance(wp), ot = normalize_importance(wt);
        ++configs;
        const auto gx = feature_proxy_gap(proxy, intended);
        if (std::all_of(gx.begin(), gx.end(), [](int v) { return v == 0; })) continue;
        ++with_gap;
        if (is_zero_vector(label_proxy_gap(op, ot, match_features(proxy, intended)))) ++violations;
    }
    const std::vector<std::string> same{"skill", "tenure"};
    const auto gx0 = feature_proxy_gap(same, same);
    const Vec gl0 = label_proxy_gap(Vec{0.7, 0.3}, Vec{0.4, 0.6}, match_features(same, same));
    const bool counter = std::all_of(gx0.begin(), gx0.end(), [](int v) { return v == 0; }) && !is_zero_vector(gl0);
    report("4 feature-gap-implies-label-gap", violations == 0 && counter && with_gap > 0,
           std::to_string(configs) + " configurations, " + std::to_string(with_gap) + " with a feature gap, " +
               std::to_string(violations) + " violations; matched-features counterexample gamma_l=(" + num(gl0[0]) +
               "," + num(gl0[1]) + ")");
}

void loop_criterion() {
    const auto t0 = std::chrono::steady_clock::now();
    SyntheticConfig cfg;
    cfg.seed = 42;
    const LoopTrajectory full = run_inequity_loop(cfg, 10, Regime::full_equity);
    const LoopTrajectory none = run_inequity_loop(cfg, 10, Regime::no_equity);
    const double secs = seconds_since(t0);

    double max_gap = 0.0;
    bool gap_defined = full.rounds.size() == 10;
    for (const auto& r : full.rounds) {
        if (std::isnan(r.fp_share[0]) || std::isnan(r.fp_share[1])) gap_defined = false;
        max_gap = std::max(max_gap, std::fabs(r.fp_share[0] - r.fp_share[1]));
    }
    auto mean_zeta = [](const LoopTrajectory& t) {
        double s = 0.0;
        for (const auto& r : t.rounds) s += r.zeta;
        return s / static_cast<double>(t.rounds.size());
    };
    const double zf = mean_zeta(full), zn = mean_zeta(none);
    const double first = none.rounds.front().curated_positive_share_g1;
    const double last = none.rounds.back().curated_positive_share_g1;
    const bool ok = gap_defined && max_gap <= 0.05 && none.rounds.size() == 10 && last <= first && zf > zn &&
                    secs < 30.0;
    report("6 inequity-loop", ok,
           "full_equity max fp-share gap " + num(max_gap) + "; no_equity g1 curated share " + num(first) + " -> " +
               num(last) + "; mean zeta full " + num(zf) + " vs none " + num(zn) + "; " + num(secs, 3) + " s");
}

Population separable(std::size_t n, std::uint64_t seed, bool obstructed) {
    gen::Rng r(seed);
    Population pop;
    pop.feature_names = {"skill", "grp"};
    for (std::size_t i = 0; i < n; ++i) {
        Individual ind;
        ind.id = "s" + std::to_string(i);
        ind.grp = static_cast<int>(i % 2);
        const int y = static_cast<int>((i / 2) % 2);
        const double v = (y == 1 ? 4.0 : -4.0) + r.uniform(-1, 1);
        ind.z = {v, static_cast<double>(ind.grp)};
        ind.x = ind.z;
        if (obstructed) ind.x[0] -= 1.0;
        ind.y = ind.y_prime = y;
        pop.individuals.push_back(std::move(ind));
    }
    return pop;
}

ModelSpace single_space(Population pop, double alpha, std::vector<Policy> policies) {
    ModelSpace s;
    ModelSpec spec;
    spec.name = "lr_skill";
    spec.feature_names = {"skill"};
    s.candidate_specs = {spec};
    s.obstacle_model = alpha > 0 ? ObstacleModel{{alpha, 0.0}, {0}} : ObstacleModel::none(2);
    s.dataset = std::move(pop);
    s.candidate_policies = std::move(policies);
    return s;
}

void scoring_criterion() {
    const ModelSpace perfect_p = single_space(separable(200, 1, true), 1.0,
                                              {Policy::no_alleviation(), Policy::full_alleviation()});
    const ModelSpace perfect_t = single_space(separable(200, 1, false), 0.0, {Policy::no_alleviation()});
    const ScoringTrace perfect = run_equity_scoring(perfect_p, perfect_t, ScoringConfig{});

    ScoringConfig capped;
    capped.max_outer_iters = 20;
    capped.max_inner_iters = 5;
    const ModelSpace blocked_p = single_space(separable(200, 2, true), 1.0, {Policy::no_alleviation(), Policy{0.5}});
    const ScoringTrace blocked = run_equity_scoring(blocked_p, perfect_t, capped);
    const bool only_access = !blocked.records.empty() &&
                             std::all_of(blocked.records.begin(), blocked.records.end(), [](const ScoringRecord& r) {
                                 return r.phase == Phase::access && !r.accepted && r.reason == kAccessGate;
                             });

    const auto [bp, bt] = synthetic_benchmark_spaces(SyntheticConfig{});
    const ScoringTrace bench = run_equity_scoring(bp, bt, ScoringConfig{});

    const bool order = phase_order_holds(perfect) && phase_order_holds(blocked) && phase_order_holds(bench);
    const bool ok = perfect.converged() && std::fabs(perfect.score - 3.0) <= 1e-9 &&
                    blocked.terminated_reason == "iteration_cap" && only_access && order;
    report("7 scoring-loop", ok,
           "perfect space " + perfect.terminated_reason + " score " + num(perfect.score, 12) + "; blocked space " +
               blocked.terminated_reason + " after " + std::to_string(blocked.records.size()) +
               " access-gate rejections; benchmark " + bench.terminated_reason + " score " + num(bench.score, 12) +
               "; phase order " + (order ? "holds" : "broken"));
}

void learner_criterion() {
    gen::Rng r(8080);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto d = static_cast<std::size_t>(r.integer(1, 5));
        Matrix x = gen::matrix(r, 30, d);
        for (std::size_t k = 0; k < d; ++k) {
            double mean = 0.0, var = 0.0;
            for (const auto& row : x) mean += row[k];
            mean /= 30.0;
            for (const auto& row : x) var += (row[k] - mean) * (row[k] - mean);
            const double sd = std::sqrt(var / 30.0);
            for (auto& row : x) row[k] = (row[k] - mean) / sd;
        }
        Labels y;
        for (const auto& row : x) y.push_back(row[0] + r.normal(0, 1) > 0 ? 1 : 0);
        Vec w(d);
        for (auto& v : w) v = r.normal(0, 1);
        const double b = r.normal(0, 0.5);
        const double l2 = 1e-4, h = 1e-6;
        const Vec g = regularized_log_loss_gradient(w, b, x, y, l2);
        for (std::size_t k = 0; k <= d; ++k) {
            Vec wp = w, wm = w;
            double bp = b, bm = b;
            (k < d ? wp[k] : bp) += h;
            (k < d ? wm[k] : bm) -= h;
            const double fd = (oracle::objective(wp, bp, x, y, l2) - oracle::objective(wm, bm, x, y, l2)) / (2 * h);
            worst = std::max(worst, std::fabs(g[k] - fd) / std::max({std::fabs(g[k]), std::fabs(fd), 1e-8}));
        }
    }
    const Matrix x = gen::matrix(r, 200, 4);
    Labels y;
    for (const auto& row : x) y.push_back(row[0] - row[1] + r.normal(0, 1) > 0 ? 1 : 0);
    ModelSpec spec;
    spec.name = "det";
    spec.feature_names = {"a", "b", "c", "d"};
    const TrainedModel m1 = train(spec, x, y, 99), m2 = train(spec, x, y, 99);
    const bool bitwise = m1.coefficients == m2.coefficients && m1.intercept == m2.intercept;
    report("8 learner-numerics", worst <= 1e-5 && bitwise,
           "max relative gradient error " + num(worst) + " on 100 problems; repeated training " +
               (bitwise ? "bitwise identical" : "differs"));
}

void checklist_criterion() {
    const fs::path log = fs::temp_directory_path() / "equity_acceptance_questions.txt";
    const std::string cmd = std::string("\"") + EQUITY_CLI_PATH + "\" questions > \"" + log.string() + "\"";
    const int status = std::system(cmd.c_str());
    const bool exited = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    std::ifstream in(log);
    int questions = 0, sections = 0;
    bool title = true;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        if (line.rfind("  ", 0) == 0) {
            ++questions;
        } else if (title) {
            title = false;
        } else {
            ++sections;
        }
    }
    const auto& cl = checklist();
    const bool shape = cl.size() == 3 && cl[0].questions.size() == 9 && cl[1].questions.size() == 10 &&
                       cl[2].questions.size() == 2;
    report("9 checklist", exited && questions == 21 && sections == 3 && shape,
           std::to_string(questions) + " questions in " + std::to_string(sections) + " sections from `equity questions`");
}

// ---------------------------------------------------------------------------

fs::path find_uci_file() {
    if (const char* env = std::getenv("EQUITY_UCI_MATH_CSV"); env && *env) return env;
    const fs::path local = fs::path(EQUITY_DATA_DIR) / "student-mat.csv";
    if (fs::exists(local)) return local;
    return {};
}

int case_study_criterion() {
    const fs::path file = find_uci_file();
    if (file.empty() || !fs::exists(file)) {
        std::cout << "SKIP 5 case-study  UCI student-mat.csv not found (set EQUITY_UCI_MATH_CSV or place it at "
                  << (fs::path(EQUITY_DATA_DIR) / "student-mat.csv").string() << ")\n";
        return 77;
    }
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg;
    cfg.input = file;
    cfg.seed = 7;
    const CaseStudyResult res = run_case_study(cfg);
    const double secs = seconds_since(t0);

    for (const auto& rr : res.regimes) {
        if (!rr.report) {
            report("5 case-study", false, "regime " + rr.name() + " is degenerate: " + rr.error);
            return 1;
        }
    }

    bool raise = true;
    std::string raise_detail;
    for (bool out : {false, true}) {
        for (bool util : {false, true}) {
            const auto& ne = res.find({false, out, util});
            const auto& eq = res.find({true, out, util});
            for (int g = 0; g < 2; ++g) raise = raise && eq.positive_rate[g] > ne.positive_rate[g];
            if (!out && !util) {
                raise_detail = "M " + num(ne.positive_rate[0], 3) + "->" + num(eq.positive_rate[0], 3) + ", F " +
                               num(ne.positive_rate[1], 3) + "->" + num(eq.positive_rate[1], 3);
            }
        }
    }
    report("5a case-study-access-raises-admission", raise, raise_detail + " (all four outcome/utilization pairs)");

    const double eo_best = res.find({true, true, false}).report->outcome.eo_violation;
    bool lowest = true;
    std::string eo_detail;
    for (bool acc : {false, true}) {
        for (bool out : {false, true}) {
            const double v = res.find({acc, out, false}).report->outcome.eo_violation;
            eo_detail += RegimeFlags{acc, out, false}.name().substr(0, 13) + "=" + num(v, 3) + " ";
            if (!(acc && out) && !(eo_best < v)) lowest = false;
        }
    }
    report("5b case-study-lowest-eo-violation", lowest, eo_detail);

    const double tp_full = res.find({true, true, true}).report->utilization.true_positive_share;
    const double tp_none = res.find({false, false, false}).report->utilization.true_positive_share;
    bool order = true;
    for (const auto& rr : res.regimes) {
        const double v = rr.report->utilization.true_positive_share;
        order = order && v <= tp_full && v >= tp_none;
    }
    const bool tp_ok = order && tp_full >= 0.90 && tp_full - tp_none >= 0.15;
    report("5c case-study-true-positive-share", tp_ok,
           "full " + num(tp_full, 4) + ", none " + num(tp_none, 4) + " (reference points 0.993 and 0.555)");
    report("5 case-study-runtime", secs < 60.0, num(secs, 3) + " s on " + std::to_string(res.students) + " students");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (argc > 1 && std::string(argv[1]) == "--case-study") return case_study_criterion();
        oracle_equivalence();
        access_outcome_example();
        gap_fixtures();
        claim_property();
        std::cout << "---- 5 case-study runs as a separate test (acceptance --case-study)\n";
        loop_criterion();
        scoring_criterion();
        learner_criterion();
        checklist_criterion();
    } catch (const std::exception& e) {
        std::cout << "FAIL unexpected exception: " << e.what() << '\n';
        return 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
