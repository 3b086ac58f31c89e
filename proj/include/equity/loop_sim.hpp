#pragma once

// Synthetic two-group populations and the multi-round ground-truth curation
// loop: a proxy model decides, proxy-positives are evaluated by the intended
// model, and (proxy features, intended outcome) pairs become the next round's
// training data.

#include "equity/core.hpp"
#include "equity/learner.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace equity {

struct SyntheticConfig {
    std::size_t n_per_round = 2000;
    std::size_t d_proxy = 3;
    std::size_t d_intended = 3;
    double group_fraction = 0.5;                       // share of grp == 1
    std::array<double, 2> obstacle_prob_by_group{0.1, 0.6};          // access obstacles
    std::array<double, 2> utilization_obstacle_prob_by_group{0.05, 0.3};
    Vec alpha_proxy;                                   // empty -> all ones
    Vec alpha_intended;                                // empty -> all ones
    double obstacle_severity = 1.0;                    // mean degradation per affected feature
    Vec true_proxy_coefficients;                       // empty -> all ones
    Vec true_intended_coefficients;                    // empty -> all ones
    double label_noise = 0.05;
    double feature_correlation = 0.92;                 // loading of each feature on a shared latent
    bool group_as_feature = true;                      // expose grp as a model feature
    std::uint64_t seed = 42;

    void validate() const;
    Vec resolved_alpha_proxy() const;
    Vec resolved_alpha_intended() const;
};

// Population columns: p0..p{d_proxy-1}, t0..t{d_intended-1}, then "grp" when
// group_as_feature is set.
std::vector<std::string> synthetic_feature_names(const SyntheticConfig& cfg);
std::vector<std::string> proxy_feature_names(const SyntheticConfig& cfg);
std::vector<std::string> intended_feature_names(const SyntheticConfig& cfg);

// Obstacle models over the full synthetic feature space.
ObstacleModel proxy_obstacle_model(const SyntheticConfig& cfg);
ObstacleModel intended_obstacle_model(const SyntheticConfig& cfg);

// An individual facing access obstacles has degraded proxy features, and the
// same obstacles resurface on the intended features while unalleviated.
// Utilization obstacles are drawn independently and degrade intended features
// only. `resurfaced[i]` holds the intended-view part (full feature space) that
// disappears once individual i's access obstacles are alleviated.
struct SyntheticCohort {
    Population population;
    std::vector<Vec> resurfaced;
};

SyntheticCohort generate_cohort(const SyntheticConfig& cfg, std::uint64_t round);
Population generate_population(const SyntheticConfig& cfg, std::uint64_t round);

struct CuratedRow {
    std::string id;
    std::uint64_t round = 0;
    int grp = 0;
    Vec features;   // proxy-view features the individual revealed
    int label = 0;  // intended-model outcome
};

struct CuratedDataset {
    std::vector<CuratedRow> rows;

    std::size_t size() const { return rows.size(); }
    void append(const CuratedDataset& other);
    std::size_t count_round(std::uint64_t round) const;
};

struct CurationInput {
    std::string id;
    int grp = 0;
    Vec proxy_features;
    int y_pt = 1;
    int y_tt = 0;
};

// Keeps proxy-positives only, labelled with their intended-model outcome.
CuratedDataset curate_ground_truth(const std::vector<CurationInput>& positives,
                                   std::uint64_t round);

enum class Regime { no_equity, access_only, access_and_outcome, full_equity };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct LoopRound {
    std::uint64_t round = 0;
    double psi = 0.0;
    double omega = 0.0;                       // NaN when undefined
    double zeta = 0.0;                        // NaN when undefined
    std::array<double, 2> pos_rate{0.0, 0.0};
    std::array<double, 2> fp_share{0.0, 0.0}; // within-group, NaN when a group has no positives
    double curated_positive_share_g1 = 0.0;   // grp 1 share of this round's positive labels
    std::size_t curated_size = 0;             // training rows after this round
    std::size_t positives = 0;
};

struct LoopEvent {
    std::uint64_t round = 0;
    std::string reason;
};

struct LoopTrajectory {
    Regime regime = Regime::no_equity;
    std::size_t seed_size = 0;
    std::vector<LoopRound> rounds;
    std::vector<LoopEvent> events;
    CuratedDataset curated;   // seed rows (round 0) followed by curated rows
};

struct LoopOptions {
    Hyperparams learner;
    double tau_o = 0.15;      // outcome bound used by outcome-equalising regimes
};

LoopTrajectory run_inequity_loop(const SyntheticConfig& cfg, std::size_t rounds, Regime regime,
                                 const LoopOptions& opts = {});

// round,regime,psi,omega,zeta,pos_rate_g0,pos_rate_g1,fp_share_g0,fp_share_g1,curated_size
std::string trajectory_csv(const std::vector<LoopTrajectory>& runs);

void to_json(nlohmann::json& j, const LoopTrajectory& t);

}  // namespace equity
