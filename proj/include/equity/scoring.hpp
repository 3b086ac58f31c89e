#pragma once

// Equity scoring over candidate proxy and intended model configurations:
// gate on access, search for acceptable outcomes, verify utilization, then
// report the composite score together with a full per-evaluation trace.

#include "equity/core.hpp"
#include "equity/learner.hpp"
#include "equity/loop_sim.hpp"
#include "equity/metrics.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace equity {

struct ModelSpace {
    std::vector<ModelSpec> candidate_specs;
    Population dataset;
    ObstacleModel obstacle_model;          // over dataset.feature_names
    std::vector<Policy> candidate_policies;

    void validate() const;
};

struct ScoringConfig {
    double tau = 0.85;
    double tau_o = 0.15;
    std::size_t max_outer_iters = 100;
    std::size_t max_inner_iters = 25;
    double epsilon_outcomes = kDefaultOutcomeEpsilon;
    double train_fraction = 0.7;
    std::uint64_t seed = 42;

    void validate() const;
};

enum class Phase { access, outcome, utilization };
std::string to_string(Phase p);

struct Candidate {
    std::size_t spec_index = 0;
    std::size_t policy_index = 0;
};

// Shuffled deck over every (spec, policy) pair. Draws are without replacement
// until the deck is exhausted, after which a freshly shuffled deck is dealt.
// reset() starts a new deck, which is how each outer iteration begins.
class CandidateSampler {
public:
    CandidateSampler(std::size_t n_specs, std::size_t n_policies, std::uint64_t seed);

    Candidate next();
    void reset();

private:
    void deal();

    std::vector<Candidate> deck_;
    std::size_t pos_ = 0;
    std::mt19937_64 rng_;
};

Candidate sample_candidate(const ModelSpace& space, CandidateSampler& sampler);

struct ScoringRecord {
    std::size_t iter = 0;       // 1-based evaluation counter over the whole run
    std::size_t outer = 0;      // 1-based outer iteration
    std::string spec_id;
    std::size_t policy_id = 0;  // index into the space's candidate_policies
    Phase phase = Phase::access;
    double psi = 0.0;           // NaN when not computed in this evaluation
    double omega = 0.0;
    double zeta = 0.0;
    bool accepted = false;
    std::string reason;         // empty when accepted
};

struct ScoringTrace {
    std::vector<ScoringRecord> records;
    double score = 0.0;         // NaN unless converged
    double psi = 0.0, omega = 0.0, zeta = 0.0;
    std::string terminated_reason;   // converged | iteration_cap
    std::string proxy_spec_id, intended_spec_id;
    std::size_t proxy_policy_id = 0, intended_policy_id = 0;

    bool converged() const { return terminated_reason == "converged"; }
};

// Rejection reasons recorded in the trace.
inline constexpr const char* kAccessGate = "access_gate";
inline constexpr const char* kOutcomeGate = "outcome_gate";
inline constexpr const char* kUtilizationGate = "utilization_gate";
inline constexpr const char* kDegenerateMetric = "degenerate_metric";

// Indices of the training rows of a seeded shuffle split; the rest is test.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(std::size_t n,
                                                                               double train_fraction,
                                                                               std::uint64_t seed);

// Throws DataError when a proxy-positive has no intended-view row with the same id.
ScoringTrace run_equity_scoring(const ModelSpace& proxy_space, const ModelSpace& intended_space,
                                const ScoringConfig& cfg);

// True when no outcome record precedes an accepted access record and no
// utilization record precedes an accepted outcome record within its outer
// iteration.
bool phase_order_holds(const ScoringTrace& trace);

// Proxy and intended spaces over one synthetic cohort (round 0 of the loop
// generator), sharing ids so proxy-positives join to their intended rows.
std::pair<ModelSpace, ModelSpace> synthetic_benchmark_spaces(const SyntheticConfig& cfg);

// iter,spec_id,policy_id,psi,omega,zeta,phase,accepted,reason
std::string trace_csv(const ScoringTrace& trace);

void to_json(nlohmann::json& j, const ScoringRecord& r);
void to_json(nlohmann::json& j, const ScoringTrace& t);
void to_json(nlohmann::json& j, const ScoringConfig& c);
void from_json(const nlohmann::json& j, ScoringConfig& c);

}  // namespace equity
