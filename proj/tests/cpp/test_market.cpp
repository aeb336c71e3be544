#include <cmath>
#include <limits>

#include "doctest.h"
#include "relrate/errors.hpp"
#include "relrate/market.hpp"

using namespace relrate;

namespace {

// one asset, one step: up 60% with probability 1/2, down 40% otherwise
Market coin_market() {
    EventTree t = EventTree::regular(1, 2);
    std::vector<NodeProcess> prices = {{1.0, 1.6, 0.6}};
    return make_market(t, prices);
}

}  // namespace

TEST_CASE("market construction validation") {
    EventTree t = EventTree::regular(1, 2);
    CHECK_THROWS_AS(make_market(t, {{1.0, 0.0, 1.2}}), validation_error);
    CHECK_THROWS_AS(make_market(t, {{1.0, 1.1}}), validation_error);
    CHECK_THROWS_AS(
        make_market(t, {{1.0, 1.1, 0.9}},
                    Polytope::from_vertices({{1.0, 0.0}, {0.0, 1.0}})),
        validation_error);
}

TEST_CASE("wealth dynamics and solvency") {
    Market m = coin_market();
    Strategy full = constant_strategy(m, {1.0});
    NodeProcess w = wealth(m, 1.0, full);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(w[2] == doctest::Approx(0.6).epsilon(1e-15));

    Strategy none = constant_strategy(m, {0.0});
    NodeProcess flat = wealth(m, 2.0, none);
    CHECK(flat[1] == 2.0);
    CHECK(flat[2] == 2.0);

    // a leveraged position that can go negative violates solvency
    EventTree t = EventTree::regular(1, 2);
    Market lev = make_market(t, {{1.0, 0.25, 1.8}},
                             Polytope::from_vertices({{0.0}, {2.0}}));
    Strategy two = constant_strategy(lev, {2.0});
    CHECK_THROWS_AS(wealth(lev, 1.0, two), domain_error);
}

TEST_CASE("growth optimal portfolio on the coin market") {
    Market m = coin_market();
    NodeProcess ones(m.tree.size(), 1.0);
    GrowthOptimal g = numeraire_portfolio(m, ones);
    // first-order condition: 0.5*0.6/(1+0.6p) = 0.5*0.4/(1-0.4p) => p = 5/12
    CHECK(g.pi.pi[0][0] == doctest::Approx(5.0 / 12.0).epsilon(1e-6));
    CHECK(g.worst_certificate <= 1e-11);
    CHECK(g.x_hat[0] == 1.0);
    CHECK(g.x_hat[1] == doctest::Approx(1.0 + 0.6 * 5.0 / 12.0).epsilon(1e-6));
    CHECK(g.x_hat[2] == doctest::Approx(1.0 - 0.4 * 5.0 / 12.0).epsilon(1e-6));
}

TEST_CASE("vertex-form constraints must be solvent") {
    EventTree t = EventTree::regular(1, 2);
    Market m = make_market(t, {{1.0, 0.25, 1.8}},
                           Polytope::from_vertices({{0.0}, {2.0}}));
    NodeProcess ones(t.size(), 1.0);
    CHECK_THROWS_AS(numeraire_portfolio(m, ones), validation_error);
}

TEST_CASE("markets dominating cash are flagged as non-viable") {
    EventTree t = EventTree::regular(1, 2);
    Market m = make_market(t, {{1.0, 1.2, 1.05}},
                           Polytope::from_halfspaces(1, {}, true));
    NodeProcess ones(t.size(), 1.0);
    CHECK_THROWS_AS(numeraire_portfolio(m, ones), viability_error);
}

TEST_CASE("stream comparison under a sampling measure") {
    EventTree t = EventTree::regular(1, 2);
    OptionalMeasure p = {0.0, 0.5, 0.5};
    CHECK(rel_streams(t, p, {0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}) ==
          doctest::Approx(0.25).epsilon(1e-14));
    CHECK(rel_streams(t, p, {0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}) ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rel_streams(t, p, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}) ==
          std::numeric_limits<double>::infinity());
}

TEST_CASE("investment-consumption plan on the coin market") {
    Market m = coin_market();
    OptionalMeasure q = {0.2, 0.4, 0.4};
    ConsumptionPlan plan = optimal_consumption(m, q, 1.0);

    // this measure keeps the deflator at one, so the plan consumes along the
    // clock at growth-optimal wealth
    CHECK(plan.pair.L[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(plan.pair.L[1] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(plan.dc[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(plan.dc[1] ==
          doctest::Approx(0.8 * (1.0 + 0.6 * 5.0 / 12.0)).epsilon(1e-6));
    CHECK(plan.dc[2] ==
          doctest::Approx(0.8 * (1.0 - 0.4 * 5.0 / 12.0)).epsilon(1e-6));

    SweepResult sweep = consumption_optimality_sweep(m, plan, q, 40, 99, 2000);
    CHECK(sweep.worst_rel <= 1e-9);
    CHECK(sweep.n_streams > 10);

    // no capital, no consumption
    ConsumptionPlan broke = optimal_consumption(m, q, 0.0);
    for (double dc : broke.dc) CHECK(dc == 0.0);
}

TEST_CASE("utility of spending schedules peaks at the canonical clock") {
    Market m = coin_market();
    OptionalMeasure q = {0.2, 0.4, 0.4};
    ConsumptionPlan plan = optimal_consumption(m, q, 1.0);
    auto usqrt = [](double x) { return std::sqrt(x); };
    CHECK(utility_functional(m.tree, q, plan.pair.K, usqrt) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // an uneven schedule on the same support scores strictly less
    NodeProcess f = plan.pair.K;
    f[1] = std::min(1.0, plan.pair.K[0] + 0.5 * plan.pair.dK[1]);
    CHECK(utility_functional(m.tree, q, f, usqrt) < 1.0);

    // spending where the clock never ticks is outside the domain
    OptionalMeasure leaf_only = {0.0, 0.5, 0.5};
    NodeProcess early(m.tree.size(), 1.0);
    early[0] = 0.5;  // the clock has dK = 0 at the root here
    CHECK_THROWS_AS(utility_functional(m.tree, leaf_only, early, usqrt),
                    domain_error);
}

TEST_CASE("sampled wealth ratios respect the one bound") {
    Market m = coin_market();
    // per leaf: hold to the end on the winning branch, sample the losing
    // branch early at the root
    RandomTime T = {1, 0};
    RandomTimeReport rep = random_time_check(m, T, 30, 17);
    CHECK(rep.pass);
    CHECK(rep.worst_expectation <= 1.0 + 1e-9);
    CHECK(rep.n_strategies > 10);
}

TEST_CASE("consumption without assets follows the clock") {
    EventTree t = EventTree::regular(2, 2);
    Market pure = make_market(t, {});
    OptionalMeasure q(t.size(), 0.0);
    q[0] = 0.25;
    q[3] = 0.25;
    q[4] = 0.125;
    q[5] = 0.25;
    q[6] = 0.125;
    ConsumptionPlan plan = optimal_consumption(pure, q, 1.0);
    for (std::size_t v = 0; v < t.size(); ++v)
        CHECK(plan.dc[v] == doctest::Approx(plan.pair.dK[v]).epsilon(1e-12));
}
