#include "equity/metrics.hpp"
#include "equity/postprocess.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace equity;

TEST_CASE("group thresholds apply per group") {
    GroupThresholds t;
    t.cut = {0.3, 0.7};
    CHECK(apply_group_thresholds(t, {0.5, 0.5, 0.7}, {0, 1, 1}) == std::vector<int>{1, 0, 1});
    CHECK_THROWS_AS(apply_group_thresholds(t, {0.5}, {0, 1}), DimensionError);
}

TEST_CASE("fitted thresholds respect the violation bound when feasible") {
    gen::Rng r(19);
    for (int t = 0; t < 40; ++t) {
        const auto o = gen::outcomes(r, 80);
        Vec scores;
        for (std::size_t i = 0; i < o.label.size(); ++i) {
            // group 1 scores are shifted down, as after an obstacle
            const double shift = o.group[i] == 1 ? -0.2 : 0.0;
            scores.push_back(0.5 + 0.25 * (o.label[i] == 1 ? 1 : -1) + r.normal(0, 0.2) + shift);
        }
        const GroupThresholds g = fit_group_thresholds(scores, o.label, o.group, 0.15, 40);
        const auto preds = apply_group_thresholds(g, scores, o.group);
        const auto omega = oracle::omega(preds, o.label, o.group);
        REQUIRE(omega.has_value());
        CHECK(*omega == doctest::Approx(g.eo_violation).epsilon(1e-12));
        if (g.feasible) CHECK(*omega <= 0.15);
    }
}

TEST_CASE("perfectly separable scores need no trade-off") {
    const Vec scores{0.9, 0.1, 0.8, 0.2};
    const std::vector<int> labels{1, 0, 1, 0};
    const std::vector<int> groups{0, 0, 1, 1};
    const GroupThresholds g = fit_group_thresholds(scores, labels, groups, 0.0, 10);
    CHECK(g.feasible);
    CHECK(g.eo_violation == 0.0);
    CHECK(g.error_rate == 0.0);
    CHECK(apply_group_thresholds(g, scores, groups) == labels);
}
