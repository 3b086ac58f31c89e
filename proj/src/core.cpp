#include "equity/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace equity {

void Population::validate() const {
    const std::size_t d = dim();
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < individuals.size(); ++i) {
        const auto& ind = individuals[i];
        if (ind.x.size() != d || ind.z.size() != d) {
            throw DimensionError("individual " + ind.id + " has feature length " +
                                 std::to_string(ind.x.size()) + "/" + std::to_string(ind.z.size()) +
                                 ", population dimension is " + std::to_string(d));
        }
        for (std::size_t k = 0; k < d; ++k) {
            if (ind.z[k] < ind.x[k]) {
                throw DomainViolation("individual " + ind.id + ": z[" + std::to_string(k) + "] < x[" +
                                      std::to_string(k) + "]");
            }
        }
        if (ind.grp != 0 && ind.grp != 1) {
            throw DomainViolation("individual " + ind.id + " has group " + std::to_string(ind.grp));
        }
        if ((ind.y != 0 && ind.y != 1) || (ind.y_prime != 0 && ind.y_prime != 1)) {
            throw DomainViolation("individual " + ind.id + " has a non-binary label");
        }
        if (!ids.insert(ind.id).second) {
            throw DomainViolation("duplicate individual id: " + ind.id);
        }
    }
}

std::size_t Population::feature_index(const std::string& name) const {
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) {
        throw DataError("unknown feature: " + name);
    }
    return static_cast<std::size_t>(it - feature_names.begin());
}

ObstacleModel ObstacleModel::on_features(std::size_t dim, const std::set<std::size_t>& affected,
                                         double weight) {
    ObstacleModel m;
    m.alpha.assign(dim, 0.0);
    for (std::size_t i : affected) {
        if (i >= dim) throw DimensionError("affected feature index out of range");
        m.alpha[i] = weight;
    }
    m.affected_features = affected;
    m.validate();
    return m;
}

ObstacleModel ObstacleModel::none(std::size_t dim) {
    return ObstacleModel{Vec(dim, 0.0), {}};
}

void ObstacleModel::validate() const {
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] >= 0.0) || std::isinf(alpha[i])) {
            throw DomainViolation("alpha[" + std::to_string(i) + "] must be finite and >= 0");
        }
        if (alpha[i] != 0.0 && !affected_features.contains(i)) {
            throw DomainViolation("alpha[" + std::to_string(i) +
                                  "] is nonzero for a feature outside affected_features");
        }
    }
    for (std::size_t i : affected_features) {
        if (i >= alpha.size()) throw DimensionError("affected feature index out of range");
    }
}

void Policy::validate() const {
    if (!(delta >= 0.0)) throw DomainViolation("policy delta must be >= 0");
}

double obstacle_magnitude(const ObstacleModel& model, const Individual& ind) {
    model.validate();
    const std::size_t d = model.alpha.size();
    if (ind.x.size() != d || ind.z.size() != d) {
        throw DimensionError("obstacle model has dimension " + std::to_string(d) +
                             " but individual " + ind.id + " has " + std::to_string(ind.x.size()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = ind.z[i] - ind.x[i];
        if (diff < 0.0) {
            throw DomainViolation("individual " + ind.id + ": z[" + std::to_string(i) +
                                  "] < x[" + std::to_string(i) + "], dominance violated");
        }
        total += model.alpha[i] * diff;
    }
    return total;
}

bool dominates(std::span<const double> z, std::span<const double> x) {
    if (z.size() != x.size()) throw DimensionError("dominates: length mismatch");
    bool strict = false;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < x[i]) return false;
        if (z[i] > x[i]) strict = true;
    }
    return strict;
}

double apply_policy(double obstacle, const Policy& policy) {
    if (!(obstacle >= 0.0)) throw DomainViolation("obstacle magnitude must be >= 0");
    policy.validate();
    return std::max(obstacle - policy.delta, 0.0);
}

RevealedPair reveal(const Individual& ind, const ObstacleModel& model, const Policy& policy) {
    const double o = obstacle_magnitude(model, ind);
    if (o == 0.0 || apply_policy(o, policy) == 0.0) {
        return RevealedPair{ind.z, ind.y_prime, true};
    }
    return RevealedPair{ind.x, ind.y, false};
}

Population project(const Population& pop, const std::vector<std::string>& features) {
    std::vector<std::size_t> idx;
    idx.reserve(features.size());
    for (const auto& f : features) idx.push_back(pop.feature_index(f));

    Population out;
    out.feature_names = features;
    out.group_name = pop.group_name;
    out.individuals.reserve(pop.size());
    for (const auto& ind : pop.individuals) {
        Individual p{Vec(idx.size()), Vec(idx.size()), ind.y_prime, ind.y, ind.grp, ind.id};
        for (std::size_t k = 0; k < idx.size(); ++k) {
            p.z[k] = ind.z.at(idx[k]);
            p.x[k] = ind.x.at(idx[k]);
        }
        out.individuals.push_back(std::move(p));
    }
    return out;
}

ObstacleModel project(const ObstacleModel& model, const Population& pop,
                      const std::vector<std::string>& features) {
    if (model.alpha.size() != pop.dim()) {
        throw DimensionError("obstacle model dimension does not match population");
    }
    ObstacleModel out;
    out.alpha.reserve(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        const std::size_t src = pop.feature_index(features[k]);
        out.alpha.push_back(model.alpha[src]);
        if (model.affected_features.contains(src)) out.affected_features.insert(k);
    }
    return out;
}

}  // namespace equity
