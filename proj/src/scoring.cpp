#include "equity/scoring.hpp"

#include "equity/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace equity {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

nlohmann::json nan_to_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

struct RevealedRows {
    Matrix rows;
    Labels labels;
    std::vector<int> groups;
};

RevealedRows reveal_rows(const Population& pop, const ObstacleModel& om, const Policy& policy,
                         const std::vector<std::size_t>& idx) {
    RevealedRows out;
    out.rows.reserve(idx.size());
    for (std::size_t i : idx) {
        const Individual& ind = pop.individuals[i];
        RevealedPair r = reveal(ind, om, policy);
        out.rows.push_back(std::move(r.x_rev));
        out.labels.push_back(r.y_rev);
        out.groups.push_back(ind.grp);
    }
    return out;
}

// One candidate configuration restricted to its spec's features.
struct View {
    Population pop;
    ObstacleModel om;
};

View make_view(const ModelSpace& space, const ModelSpec& spec) {
    return View{project(space.dataset, spec.feature_names),
                project(space.obstacle_model, space.dataset, spec.feature_names)};
}

}  // namespace

// ============================================================================
// CONFIGURATION
// ============================================================================

void ModelSpace::validate() const {
    if (candidate_specs.empty()) throw DomainViolation("model space has no candidate specs");
    if (candidate_policies.empty()) throw DomainViolation("model space has no candidate policies");
    if (dataset.empty()) throw DomainViolation("model space dataset is empty");
    dataset.validate();
    obstacle_model.validate();
    if (obstacle_model.alpha.size() != dataset.dim()) {
        throw DimensionError("obstacle model dimension differs from the dataset's");
    }
    for (const auto& s : candidate_specs) {
        s.validate();
        for (const auto& f : s.feature_names) (void)dataset.feature_index(f);
    }
    for (const auto& p : candidate_policies) p.validate();
}

void ScoringConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainViolation("tau must lie in (0, 1]");
    if (!(tau_o >= 0.0 && tau_o < 1.0)) throw DomainViolation("tau_o must lie in [0, 1)");
    if (max_outer_iters == 0 || max_inner_iters == 0) {
        throw DomainViolation("iteration caps must be positive");
    }
    if (!(epsilon_outcomes >= 0.0)) throw DomainViolation("epsilon_outcomes must be non-negative");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw DomainViolation("train_fraction must lie in (0, 1)");
    }
}

std::string to_string(Phase p) {
    switch (p) {
        case Phase::access: return "access";
        case Phase::outcome: return "outcome";
        case Phase::utilization: return "utilization";
    }
    return "unknown";
}

// ============================================================================
// SAMPLING
// ============================================================================

CandidateSampler::CandidateSampler(std::size_t n_specs, std::size_t n_policies, std::uint64_t seed)
    : rng_(seed) {
    if (n_specs == 0 || n_policies == 0) throw DomainViolation("cannot sample from an empty space");
    for (std::size_t s = 0; s < n_specs; ++s) {
        for (std::size_t p = 0; p < n_policies; ++p) deck_.push_back({s, p});
    }
    deal();
}

void CandidateSampler::deal() {
    std::shuffle(deck_.begin(), deck_.end(), rng_);
    pos_ = 0;
}

void CandidateSampler::reset() { deal(); }

Candidate CandidateSampler::next() {
    if (pos_ == deck_.size()) deal();
    return deck_[pos_++];
}

Candidate sample_candidate(const ModelSpace& space, CandidateSampler& sampler) {
    if (space.candidate_specs.empty() || space.candidate_policies.empty()) {
        throw DomainViolation("cannot sample from an empty space");
    }
    const Candidate c = sampler.next();
    if (c.spec_index >= space.candidate_specs.size() ||
        c.policy_index >= space.candidate_policies.size()) {
        throw DimensionError("sampler was built for a different space");
    }
    return c;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(std::size_t n,
                                                                               double train_fraction,
                                                                               std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

// ============================================================================
// SCORING LOOP
// ============================================================================

ScoringTrace run_equity_scoring(const ModelSpace& proxy_space, const ModelSpace& intended_space,
                                const ScoringConfig& cfg) {
    proxy_space.validate();
    intended_space.validate();
    cfg.validate();

    const auto [p_train, p_test] = train_test_split(proxy_space.dataset.size(), cfg.train_fraction, cfg.seed);
    const auto [t_train, t_test] =
        train_test_split(intended_space.dataset.size(), cfg.train_fraction, cfg.seed + 1);
    (void)t_test;

    std::unordered_map<std::string, std::size_t> intended_row;
    for (std::size_t i = 0; i < intended_space.dataset.size(); ++i) {
        intended_row.emplace(intended_space.dataset.individuals[i].id, i);
    }

    CandidateSampler proxy_sampler(proxy_space.candidate_specs.size(),
                                   proxy_space.candidate_policies.size(), cfg.seed);
    CandidateSampler intended_sampler(intended_space.candidate_specs.size(),
                                      intended_space.candidate_policies.size(),
                                      cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    ScoringTrace trace;
    trace.score = kNaN;
    trace.psi = trace.omega = trace.zeta = kNaN;
    const std::size_t budget = cfg.max_outer_iters * cfg.max_inner_iters;
    std::size_t iter = 0;

    auto push = [&](std::size_t outer, const std::string& spec_id, std::size_t policy_id, Phase phase,
                    double psi, double omega, double zeta, const std::string& reason) {
        ScoringRecord r;
        r.iter = ++iter;
        r.outer = outer;
        r.spec_id = spec_id;
        r.policy_id = policy_id;
        r.phase = phase;
        r.psi = psi;
        r.omega = omega;
        r.zeta = zeta;
        r.accepted = reason.empty();
        r.reason = reason;
        trace.records.push_back(std::move(r));
    };

    for (std::size_t outer = 1; outer <= cfg.max_outer_iters && iter < budget; ++outer) {
        // Access: features and policy alone decide it.
        proxy_sampler.reset();
        const Candidate pc = sample_candidate(proxy_space, proxy_sampler);
        const ModelSpec& access_spec = proxy_space.candidate_specs[pc.spec_index];
        const Policy& p_policy = proxy_space.candidate_policies[pc.policy_index];
        const View access_view = make_view(proxy_space, access_spec);
        const double psi = model_access(access_view.pop, access_view.om, p_policy).psi;
        if (psi < cfg.tau) {
            push(outer, access_spec.name, pc.policy_index, Phase::access, psi, kNaN, kNaN, kAccessGate);
            continue;
        }
        push(outer, access_spec.name, pc.policy_index, Phase::access, psi, kNaN, kNaN, "");

        // Outcomes: re-sample the model function over the accepted feature set.
        std::vector<std::size_t> pool;
        for (std::size_t s = 0; s < proxy_space.candidate_specs.size(); ++s) {
            if (proxy_space.candidate_specs[s].feature_names == access_spec.feature_names) pool.push_back(s);
        }
        CandidateSampler function_sampler(pool.size(), 1, cfg.seed + outer);
        const RevealedRows train_rows = reveal_rows(access_view.pop, access_view.om, p_policy, p_train);
        const RevealedRows test_rows = reveal_rows(access_view.pop, access_view.om, p_policy, p_test);

        bool outcome_ok = false;
        double omega = kNaN;
        std::string proxy_spec_id;
        Labels test_preds;
        for (std::size_t inner = 0; inner < cfg.max_inner_iters && iter < budget; ++inner) {
            const std::size_t s = inner == 0 ? pc.spec_index : pool[function_sampler.next().spec_index];
            const ModelSpec& spec = proxy_space.candidate_specs[s];
            try {
                const TrainedModel model = train(spec, train_rows.rows, train_rows.labels, cfg.seed + iter);
                test_preds = predict(model, test_rows.rows);
                omega = eo_violation(test_preds, test_rows.labels, test_rows.groups, cfg.epsilon_outcomes)
                            .eo_violation;
            } catch (const DomainViolation&) {
                push(outer, spec.name, pc.policy_index, Phase::outcome, psi, kNaN, kNaN, kDegenerateMetric);
                continue;
            } catch (const UndefinedMetricError&) {
                push(outer, spec.name, pc.policy_index, Phase::outcome, psi, kNaN, kNaN, kDegenerateMetric);
                continue;
            }
            if (omega > cfg.tau_o) {
                push(outer, spec.name, pc.policy_index, Phase::outcome, psi, omega, kNaN, kOutcomeGate);
                continue;
            }
            push(outer, spec.name, pc.policy_index, Phase::outcome, psi, omega, kNaN, "");
            proxy_spec_id = spec.name;
            outcome_ok = true;
            break;
        }
        if (!outcome_ok) continue;

        // Utilization: proxy-positives of the test split are evaluated by the
        // intended model on their own intended-view rows.
        std::vector<std::size_t> positives_rows;
        std::vector<int> positives_grp;
        std::vector<std::string> positives_id;
        for (std::size_t k = 0; k < p_test.size(); ++k) {
            if (test_preds[k] != 1) continue;
            const Individual& ind = proxy_space.dataset.individuals[p_test[k]];
            const auto it = intended_row.find(ind.id);
            if (it == intended_row.end()) {
                throw DataError("proxy-positive '" + ind.id + "' has no intended-view row");
            }
            positives_rows.push_back(it->second);
            positives_grp.push_back(ind.grp);
            positives_id.push_back(ind.id);
        }
        if (positives_rows.empty()) {
            if (iter < budget) {
                push(outer, proxy_spec_id, pc.policy_index, Phase::utilization, psi, omega, kNaN,
                     kDegenerateMetric);
            }
            continue;
        }

        intended_sampler.reset();
        for (std::size_t inner = 0; inner < cfg.max_inner_iters && iter < budget; ++inner) {
            const Candidate ic = sample_candidate(intended_space, intended_sampler);
            const ModelSpec& ispec = intended_space.candidate_specs[ic.spec_index];
            const Policy& i_policy = intended_space.candidate_policies[ic.policy_index];
            const View iview = make_view(intended_space, ispec);
            double zeta = kNaN;
            try {
                const RevealedRows itrain = reveal_rows(iview.pop, iview.om, i_policy, t_train);
                const TrainedModel imodel = train(ispec, itrain.rows, itrain.labels, cfg.seed + iter);
                const RevealedRows evaluated = reveal_rows(iview.pop, iview.om, i_policy, positives_rows);
                const Labels y_tt = predict(imodel, evaluated.rows);
                std::vector<EvaluationRecord> records;
                records.reserve(y_tt.size());
                for (std::size_t k = 0; k < y_tt.size(); ++k) {
                    records.push_back({positives_id[k], positives_grp[k], 1, y_tt[k]});
                }
                zeta = utilization(records).zeta;
            } catch (const DomainViolation&) {
                push(outer, ispec.name, ic.policy_index, Phase::utilization, psi, omega, kNaN,
                     kDegenerateMetric);
                continue;
            }
            if (zeta < cfg.tau) {
                push(outer, ispec.name, ic.policy_index, Phase::utilization, psi, omega, zeta,
                     kUtilizationGate);
                continue;
            }
            push(outer, ispec.name, ic.policy_index, Phase::utilization, psi, omega, zeta, "");
            trace.psi = psi;
            trace.omega = omega;
            trace.zeta = zeta;
            trace.score = equity_score(psi, omega, zeta);
            trace.terminated_reason = "converged";
            trace.proxy_spec_id = proxy_spec_id;
            trace.proxy_policy_id = pc.policy_index;
            trace.intended_spec_id = ispec.name;
            trace.intended_policy_id = ic.policy_index;
            return trace;
        }
    }
    trace.terminated_reason = "iteration_cap";
    return trace;
}

bool phase_order_holds(const ScoringTrace& trace) {
    std::size_t outer = 0;
    bool access_ok = false, outcome_ok = false;
    for (const auto& r : trace.records) {
        if (r.outer != outer) {
            outer = r.outer;
            access_ok = outcome_ok = false;
        }
        switch (r.phase) {
            case Phase::access:
                if (access_ok) return false;   // one access decision per outer iteration
                access_ok = r.accepted;
                break;
            case Phase::outcome:
                if (!access_ok || outcome_ok) return false;
                outcome_ok = r.accepted;
                break;
            case Phase::utilization:
                if (!outcome_ok) return false;
                break;
        }
    }
    return true;
}

// ============================================================================
// SYNTHETIC BENCHMARK
// ============================================================================

std::pair<ModelSpace, ModelSpace> synthetic_benchmark_spaces(const SyntheticConfig& cfg) {
    const Population pop = generate_population(cfg, 0);
    const auto pnames = proxy_feature_names(cfg);
    const auto tnames = intended_feature_names(cfg);

    auto spec = [](std::string name, std::vector<std::string> features, double l2) {
        ModelSpec s;
        s.name = std::move(name);
        s.feature_names = std::move(features);
        s.hyperparams.l2 = l2;
        return s;
    };
    auto without_group = [&](std::vector<std::string> names) {
        std::erase(names, pop.group_name);
        return names;
    };

    ModelSpace proxy;
    proxy.dataset = pop;
    proxy.obstacle_model = proxy_obstacle_model(cfg);
    proxy.candidate_specs = {spec("proxy_lr", pnames, 1e-4), spec("proxy_lr_ridge", pnames, 1e-1),
                             spec("proxy_lr_blind", without_group(pnames), 1e-4)};
    proxy.candidate_policies = {Policy::no_alleviation(), Policy{0.5}, Policy::full_alleviation()};

    ModelSpace intended;
    intended.dataset = pop;
    intended.obstacle_model = intended_obstacle_model(cfg);
    intended.candidate_specs = {spec("intended_lr", tnames, 1e-4),
                                spec("intended_lr_blind", without_group(tnames), 1e-4)};
    intended.candidate_policies = {Policy::no_alleviation(), Policy::full_alleviation()};
    return {std::move(proxy), std::move(intended)};
}

// ============================================================================
// SERIALIZATION
// ============================================================================

std::string trace_csv(const ScoringTrace& trace) {
    std::ostringstream os;
    os << "iter,spec_id,policy_id,psi,omega,zeta,phase,accepted,reason\n";
    for (const auto& r : trace.records) {
        os << r.iter << ',' << r.spec_id << ',' << r.policy_id << ',' << format_double(r.psi) << ','
           << format_double(r.omega) << ',' << format_double(r.zeta) << ',' << to_string(r.phase) << ','
           << (r.accepted ? "true" : "false") << ',' << r.reason << '\n';
    }
    return os.str();
}

void to_json(nlohmann::json& j, const ScoringRecord& r) {
    j = {{"iter", r.iter},
         {"outer", r.outer},
         {"spec_id", r.spec_id},
         {"policy_id", r.policy_id},
         {"phase", to_string(r.phase)},
         {"psi", nan_to_null(r.psi)},
         {"omega", nan_to_null(r.omega)},
         {"zeta", nan_to_null(r.zeta)},
         {"accepted", r.accepted},
         {"reason", r.reason}};
}

void to_json(nlohmann::json& j, const ScoringTrace& t) {
    j = {{"records", t.records},
         {"score", nan_to_null(t.score)},
         {"psi", nan_to_null(t.psi)},
         {"omega", nan_to_null(t.omega)},
         {"zeta", nan_to_null(t.zeta)},
         {"terminated_reason", t.terminated_reason}};
    if (t.converged()) {
        j["proxy"] = {{"spec_id", t.proxy_spec_id}, {"policy_id", t.proxy_policy_id}};
        j["intended"] = {{"spec_id", t.intended_spec_id}, {"policy_id", t.intended_policy_id}};
    }
}

void to_json(nlohmann::json& j, const ScoringConfig& c) {
    j = {{"tau", c.tau},
         {"tau_o", c.tau_o},
         {"max_outer_iters", c.max_outer_iters},
         {"max_inner_iters", c.max_inner_iters},
         {"epsilon_outcomes", c.epsilon_outcomes},
         {"train_fraction", c.train_fraction},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ScoringConfig& c) {
    ScoringConfig d;
    d.tau = j.value("tau", d.tau);
    d.tau_o = j.value("tau_o", d.tau_o);
    d.max_outer_iters = j.value("max_outer_iters", d.max_outer_iters);
    d.max_inner_iters = j.value("max_inner_iters", d.max_inner_iters);
    d.epsilon_outcomes = j.value("epsilon_outcomes", d.epsilon_outcomes);
    d.train_fraction = j.value("train_fraction", d.train_fraction);
    d.seed = j.value("seed", d.seed);
    d.validate();
    c = d;
}

}  // namespace equity
