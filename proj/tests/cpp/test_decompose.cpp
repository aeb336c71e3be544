#include <cmath>

#include "doctest.h"
#include "relrate/decompose.hpp"
#include "relrate/errors.hpp"
#include "relrate/tree.hpp"

using namespace relrate;

namespace {

EventTree smoke_tree() {
    return EventTree::from_parents({-1, 0, 0, 1, 1, 2, 2},
                                   {1.0, 0.6, 0.4, 0.5, 0.5, 0.7, 0.3});
}

void check_report(const PairReport& r, double tol, double drift_tol) {
    CHECK(r.root_l_error <= tol);
    CHECK(r.negativity_error <= tol);
    CHECK(r.k_monotone_error <= tol);
    CHECK(r.k_range_error <= tol);
    CHECK(r.lk_identity_error <= tol);
    CHECK(r.dh_identity_error <= tol);
    CHECK(r.frozen_l_error <= tol);
    CHECK(r.dk_at_dead_error <= tol);
    CHECK(r.leaf_exhaust_error <= tol);
    CHECK(r.pathwise_error <= tol);
    CHECK(r.martingale_drift <= drift_tol);
}

}  // namespace

TEST_CASE("canonical pair on the reference tree") {
    EventTree t = smoke_tree();
    OptionalMeasure q = {0.1, 0.2, 0.0, 0.15, 0.05, 0.3, 0.2};
    CanonicalPair pair = decompose_measure(t, q);

    struct Frozen {
        int node;
        double dH, K, L;
    };
    const Frozen rows[] = {
        {0, 0.1, 0.1, 1.0},
        {1, 1.0 / 3.0, 0.55, 0.7407407407407407},
        {2, 0.0, 0.1, 1.3888888888888888},
        {3, 0.5, 1.0, 1.1111111111111112},
        {4, 1.0 / 6.0, 1.0, 0.37037037037037035},
        {5, 25.0 / 28.0 * 1.2, 1.0, 1.1904761904761905},
        {6, 0.2 / 0.12, 1.0, 1.8518518518518519},
    };
    for (const Frozen& r : rows) {
        CAPTURE(r.node);
        CHECK(pair.dH[r.node] == doctest::Approx(r.dH).epsilon(1e-13));
        CHECK(pair.K[r.node] == doctest::Approx(r.K).epsilon(1e-13));
        CHECK(pair.L[r.node] == doctest::Approx(r.L).epsilon(1e-13));
    }

    check_report(verify_pair(t, pair.H, pair), 1e-12, 1e-10);

    OptionalMeasure back = pair_to_measure(t, pair);
    for (std::size_t v = 0; v < t.size(); ++v)
        CHECK(back[v] == doctest::Approx(q[v]).epsilon(1e-13));
}

TEST_CASE("mass dying on a branch freezes the pair there") {
    EventTree t = smoke_tree();
    OptionalMeasure q = {0.2, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0};
    CanonicalPair pair = decompose_measure(t, q);

    // the left branch carries no future mass: its deflator collapses to zero
    // and the clock freezes at the already-spent fraction
    CHECK(pair.L[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(pair.K[1] == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(pair.L[3] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(pair.K[3] == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(pair.L[4] == doctest::Approx(0.0).epsilon(1e-14));

    // the right branch spends everything in one step
    CHECK(pair.L[2] == doctest::Approx(2.5).epsilon(1e-13));
    CHECK(pair.K[2] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(pair.L[5] == doctest::Approx(2.5).epsilon(1e-13));
    CHECK(pair.K[5] == doctest::Approx(1.0).epsilon(1e-13));

    // the raw sampling process is unbounded on that branch even though its
    // expectation stays one
    CHECK(pair.H[2] == doctest::Approx(2.2).epsilon(1e-13));

    check_report(verify_pair(t, pair.H, pair), 1e-12, 1e-10);
}

TEST_CASE("decomposition input validation") {
    EventTree t = EventTree::from_parents({-1, 0, 0}, {1.0, 0.5, 0.5});
    CHECK_THROWS_AS(check_optional_measure(t, {0.5, 0.5, -0.1}), validation_error);
    CHECK_THROWS_AS(check_optional_measure(t, {0.1, 0.1, 0.1}), validation_error);
    // a cumulative process that decreases along a path is not a sampling clock
    CHECK_THROWS_AS(decompose(t, {0.5, 0.4, 1.5}), validation_error);
    // terminal expectation must be one
    CHECK_THROWS_AS(decompose(t, {0.0, 0.5, 0.5}), validation_error);
}

TEST_CASE("strict-drift approximations converge to the pair") {
    EventTree t = smoke_tree();
    OptionalMeasure q = {0.1, 0.2, 0.0, 0.15, 0.05, 0.3, 0.2};
    NodeProcess h = measure_to_H(t, q).H;
    auto gaps = perturbation_convergence(t, h, {1e-2, 1e-3, 1e-4});
    REQUIRE(gaps.size() == 3);
    CHECK(gaps[1].k_gap <= gaps[0].k_gap);
    CHECK(gaps[2].k_gap <= gaps[1].k_gap);
    CHECK(gaps[1].l_gap <= gaps[0].l_gap);
    CHECK(gaps[2].l_gap <= gaps[1].l_gap);
    CHECK(gaps[2].k_gap < 1e-3);
    CHECK(gaps[2].l_gap < 1e-3);
    CHECK_THROWS_AS(perturbation_convergence(t, h, {0.0}), validation_error);
}
