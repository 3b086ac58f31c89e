#pragma once

// Domain types shared by every module: individuals with obstacle-free (z) and
// obstacle-refrained (x) feature values, obstacle models, alleviation policies
// and the revealed pair an individual presents to a decision model.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace equity {

using Vec = std::vector<double>;

// ============================================================================
// ERRORS
// ============================================================================

class EquityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Vector lengths or table shapes disagree.
class DimensionError : public EquityError {
public:
    using EquityError::EquityError;
};

// A value lies outside the domain of an operation (negative obstacle,
// dominance violated, invalid configuration).
class DomainViolation : public EquityError {
public:
    using EquityError::EquityError;
};

// A rate or metric is undefined for the given data (e.g. a group without
// positive labels has no true-positive rate). Never silently defaulted.
class UndefinedMetricError : public EquityError {
public:
    using EquityError::EquityError;
};

// Malformed input files, missing columns, I/O failures.
class DataError : public EquityError {
public:
    using EquityError::EquityError;
};

// ============================================================================
// DOMAIN TYPES
// ============================================================================

struct Individual {
    Vec z;              // obstacle-free feature values
    Vec x;              // obstacle-refrained feature values
    int y_prime = 0;    // obstacle-free label
    int y = 0;          // obstacle-refrained label
    int grp = 0;        // protected group, 0 or 1
    std::string id;
};

struct Population {
    std::vector<Individual> individuals;
    std::vector<std::string> feature_names;
    std::string group_name = "grp";

    std::size_t dim() const { return feature_names.size(); }
    std::size_t size() const { return individuals.size(); }
    bool empty() const { return individuals.empty(); }

    // Dimensions, label/group domains and id uniqueness.
    void validate() const;

    std::size_t feature_index(const std::string& name) const;
};

struct ObstacleModel {
    Vec alpha;                           // per-feature constraint weight, >= 0
    std::set<std::size_t> affected_features;

    // alpha on `affected`, zero elsewhere.
    static ObstacleModel on_features(std::size_t dim, const std::set<std::size_t>& affected,
                                     double weight = 1.0);
    static ObstacleModel none(std::size_t dim);

    void validate() const;
};

struct Policy {
    double delta = 0.0;    // per-individual alleviation allowance

    static Policy no_alleviation() { return Policy{0.0}; }
    static Policy full_alleviation() { return Policy{std::numeric_limits<double>::infinity()}; }

    void validate() const;
};

struct RevealedPair {
    Vec x_rev;
    int y_rev = 0;
    bool fully_accessed = false;
};

// ============================================================================
// OPERATIONS
// ============================================================================

// O(x, z) = <alpha, z - x>. Throws DimensionError on length mismatch and
// DomainViolation if any z_i < x_i.
double obstacle_magnitude(const ObstacleModel& model, const Individual& ind);

// z strictly dominates x: every z_i >= x_i and at least one z_i > x_i.
bool dominates(std::span<const double> z, std::span<const double> x);

// max(obstacle - delta, 0).
double apply_policy(double obstacle, const Policy& policy);

// (z, y') when the individual faces no obstacle or the policy removes it
// entirely, (x, y) otherwise.
RevealedPair reveal(const Individual& ind, const ObstacleModel& model, const Policy& policy);

// Restricts a population and obstacle model to a subset of named features.
Population project(const Population& pop, const std::vector<std::string>& features);
ObstacleModel project(const ObstacleModel& model, const Population& pop,
                      const std::vector<std::string>& features);

}  // namespace equity
