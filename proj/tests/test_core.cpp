#include "equity/core.hpp"
#include "equity/metrics.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace equity;

namespace {

Individual person(Vec z, Vec x, int grp = 0, std::string id = "p") {
    Individual ind;
    ind.z = std::move(z);
    ind.x = std::move(x);
    ind.grp = grp;
    ind.y = 0;
    ind.y_prime = 1;
    ind.id = std::move(id);
    return ind;
}

ObstacleModel weights(Vec alpha) {
    ObstacleModel m;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k] > 0.0) m.affected_features.insert(k);
    }
    m.alpha = std::move(alpha);
    return m;
}

}  // namespace

TEST_CASE("obstacle magnitude is the weighted shortfall") {
    CHECK(obstacle_magnitude(weights({1, 1}), person({6, 0}, {5, 0})) == doctest::Approx(1.0));
    CHECK(obstacle_magnitude(weights({0.5, 2}), person({2, 1}, {0, 0})) == doctest::Approx(3.0));
    CHECK(obstacle_magnitude(weights({1, 1}), person({3, 3}, {3, 3})) == 0.0);
}

TEST_CASE("obstacle magnitude rejects malformed input") {
    CHECK_THROWS_AS(obstacle_magnitude(weights({1, 1, 1}), person({6, 0}, {5, 0})), DimensionError);
    CHECK_THROWS_AS(obstacle_magnitude(weights({1, 1}), person({4, 0}, {5, 0})), DomainViolation);
    CHECK_THROWS_AS(obstacle_magnitude(weights({-1, 1}), person({6, 0}, {5, 0})), DomainViolation);
}

TEST_CASE("dominance requires a strict improvement somewhere") {
    const Vec a{6, 0}, b{5, 0}, c{1, 3}, d{2, 1};
    CHECK(dominates(a, b));
    CHECK_FALSE(dominates(a, a));
    CHECK_FALSE(dominates(c, d));
    CHECK_FALSE(dominates(d, c));
}

TEST_CASE("policy subtracts the allowance and floors at zero") {
    CHECK(apply_policy(3, Policy{5}) == 0.0);
    CHECK(apply_policy(7, Policy{5}) == 2.0);
    CHECK(apply_policy(0, Policy{0}) == 0.0);
    CHECK(apply_policy(7, Policy::full_alleviation()) == 0.0);
    CHECK(apply_policy(7, Policy::no_alleviation()) == 7.0);
    CHECK_THROWS_AS(apply_policy(-1, Policy{0}), DomainViolation);
    CHECK_THROWS_AS(apply_policy(1, Policy{-1}), DomainViolation);
}

TEST_CASE("policy output is monotone in both arguments") {
    gen::Rng r(11);
    for (int t = 0; t < 500; ++t) {
        const double o1 = r.uniform(0, 10), o2 = o1 + r.uniform(0, 5);
        const double d1 = r.uniform(0, 10), d2 = d1 + r.uniform(0, 5);
        CHECK(apply_policy(o1, Policy{d1}) <= apply_policy(o2, Policy{d1}));
        CHECK(apply_policy(o1, Policy{d2}) <= apply_policy(o1, Policy{d1}));
        CHECK(apply_policy(o1, Policy{d1}) >= 0.0);
        CHECK(apply_policy(o1, Policy{d1}) <= o1);
    }
}

TEST_CASE("reveal exposes z only when the obstacle is fully lifted") {
    const ObstacleModel om = weights({1, 1});
    Individual small = person({6, 0}, {5, 0});
    small.y = 0;
    small.y_prime = 1;
    const RevealedPair a = reveal(small, om, Policy{5});
    CHECK(a.fully_accessed);
    CHECK(a.x_rev == Vec{6, 0});
    CHECK(a.y_rev == 1);

    Individual big = person({11, 0}, {5, 0});
    const RevealedPair b = reveal(big, om, Policy{5});
    CHECK_FALSE(b.fully_accessed);
    CHECK(b.x_rev == Vec{5, 0});
    CHECK(b.y_rev == 0);

    const RevealedPair c = reveal(person({2, 2}, {2, 2}), om, Policy::no_alleviation());
    CHECK(c.fully_accessed);
}

TEST_CASE("reveal under full alleviation always yields z") {
    gen::Rng r(5);
    for (int t = 0; t < 50; ++t) {
        const Population pop = gen::population(r, 20, 3);
        const ObstacleModel om = weights(gen::alpha(r, 3));
        for (const auto& ind : pop.individuals) {
            const RevealedPair p = reveal(ind, om, Policy::full_alleviation());
            CHECK(p.fully_accessed);
            CHECK(p.x_rev == ind.z);
            CHECK(p.y_rev == ind.y_prime);
        }
    }
}

TEST_CASE("access share matches the brute-force count") {
    gen::Rng r(1234);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = static_cast<std::size_t>(r.integer(1, 50));
        const std::size_t d = static_cast<std::size_t>(r.integer(1, 5));
        const Population pop = gen::population(r, std::max<std::size_t>(n, 2), d);
        const ObstacleModel om = weights(gen::alpha(r, d));
        const double delta = r.coin(0.2) ? std::numeric_limits<double>::infinity() : r.integer(0, 8) * 0.25;
        std::vector<Vec> z, x;
        for (const auto& ind : pop.individuals) {
            z.push_back(ind.z);
            x.push_back(ind.x);
        }
        const AccessReport rep = model_access(pop, om, Policy{delta});
        CHECK(std::fabs(rep.psi - oracle::psi(z, x, om.alpha, delta)) <= 1e-12);
        CHECK(rep.per_individual.size() == pop.size());
    }
}

TEST_CASE("access share never decreases as the allowance grows") {
    gen::Rng r(77);
    for (int t = 0; t < 100; ++t) {
        const Population pop = gen::population(r, 30, 3);
        const ObstacleModel om = weights(gen::alpha(r, 3));
        double prev = -1.0;
        for (double delta : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
            const double psi = model_access(pop, om, Policy{delta}).psi;
            CHECK(psi >= prev);
            prev = psi;
        }
        CHECK(model_access(pop, om, Policy::full_alleviation()).psi == 1.0);
    }
}

TEST_CASE("projection keeps the named columns and their obstacle weights") {
    Population pop;
    pop.feature_names = {"a", "b", "c"};
    pop.individuals.push_back(person({1, 2, 3}, {1, 1, 3}));
    pop.individuals.push_back(person({4, 5, 6}, {4, 5, 6}, 1, "q"));
    const ObstacleModel om = weights({0, 2, 1});

    const Population p = project(pop, {"c", "b"});
    CHECK(p.feature_names == std::vector<std::string>{"c", "b"});
    CHECK(p.individuals[0].z == Vec{3, 2});
    CHECK(p.individuals[0].x == Vec{3, 1});
    const ObstacleModel pm = project(om, pop, {"c", "b"});
    CHECK(pm.alpha == Vec{1, 2});
    CHECK(pm.affected_features == std::set<std::size_t>{0, 1});
    CHECK_THROWS_AS(project(pop, {"nope"}), DataError);
}

TEST_CASE("population validation catches broken invariants") {
    Population pop;
    pop.feature_names = {"a"};
    pop.individuals.push_back(person({1}, {2}));
    CHECK_THROWS(pop.validate());
    pop.individuals[0] = person({2}, {1});
    pop.individuals[0].grp = 2;
    CHECK_THROWS(pop.validate());
}
