#include <cmath>

#include "doctest.h"
#include "relrate/errors.hpp"
#include "relrate/tree.hpp"

using namespace relrate;

TEST_CASE("tree construction and validation") {
    EventTree t = EventTree::regular(2, 2);
    CHECK(t.size() == 7);
    CHECK(t.horizon() == 2);
    CHECK(t.leaves().size() == 4);
    CHECK(t.node(3).prob == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(t.ancestor_at(5, 0) == 0);
    CHECK(t.ancestor_at(5, 1) == 2);
    CHECK(t.ancestor_at(5, 2) == 5);
    CHECK_THROWS_AS(t.ancestor_at(5, 3), validation_error);

    // children must follow parents
    CHECK_THROWS_AS(EventTree::from_parents({-1, 2, 0}, {1.0, 0.5, 0.5}),
                    validation_error);
    // siblings must carry a full conditional probability
    CHECK_THROWS_AS(EventTree::from_parents({-1, 0, 0}, {1.0, 0.5, 0.4}),
                    validation_error);
    // the root branch probability is one by convention
    CHECK_THROWS_AS(EventTree::from_parents({-1, 0, 0}, {0.9, 0.5, 0.5}),
                    validation_error);
    // null branches are not representable
    CHECK_THROWS_AS(EventTree::from_parents({-1, 0, 0}, {1.0, 0.0, 1.0}),
                    validation_error);
}

TEST_CASE("conditional expectation and martingale classes") {
    EventTree t = EventTree::from_parents({-1, 0, 0}, {1.0, 0.6, 0.4});
    NodeProcess x = {0.0, 2.0, 5.0};
    NodeProcess m = conditional_expectation(t, x);
    CHECK(m[0] == doctest::Approx(3.2).epsilon(1e-15));
    CHECK(m[1] == 2.0);
    CHECK(m[2] == 5.0);

    NodeProcess mart = {3.2, 2.0, 5.0};
    CHECK(martingale_class(t, mart).kind == MartingaleKind::martingale);
    NodeProcess super = {4.0, 2.0, 5.0};
    CHECK(martingale_class(t, super).kind == MartingaleKind::supermartingale);
    NodeProcess sub = {2.0, 2.0, 5.0};
    CHECK(martingale_class(t, sub).kind == MartingaleKind::submartingale);

    CHECK_THROWS_AS(check_node_process(t, {1.0, 2.0}), validation_error);
}

TEST_CASE("stopping times versus lookahead times") {
    EventTree t = EventTree::regular(2, 2);
    // one entry per leaf, in t.leaves() order
    RandomTime constant(t.leaves().size(), 1);
    CHECK(is_stopping_time(t, constant));

    // distinguishing sibling leaves from time zero peeks at the future
    RandomTime peek = {0, 1, 2, 2};
    CHECK_FALSE(is_stopping_time(t, peek));

    RandomTime bad(t.leaves().size(), 0);
    bad[0] = 5;  // beyond the leaf's own time
    CHECK_THROWS_AS(check_random_time(t, bad), validation_error);
}

TEST_CASE("sampling measures of random times") {
    EventTree t = EventTree::from_parents({-1, 0, 0}, {1.0, 0.5, 0.5});
    // leaves are nodes 1 and 2: sample the left path at the root, the
    // right path at the end
    RandomTime T = {0, 1};
    DualProjection proj = dual_optional_projection(t, T);
    CHECK(proj.dH[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(proj.dH[1] == 0.0);
    CHECK(proj.dH[2] == doctest::Approx(1.0).epsilon(1e-15));

    // unit total mass: E[H at the end] = 1 for every random time
    double mass = 0.0;
    for (std::size_t v = 0; v < t.size(); ++v)
        mass += t.node(static_cast<int>(v)).prob * proj.dH[v];
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));

    // E[V at T] computed directly or through the sampling measure
    NodeProcess V = {0.3, 1.7, 2.9};
    CHECK(expectation_at(t, V, T) ==
          doctest::Approx(optional_sum(t, V, proj.dH)).epsilon(1e-14));
    CHECK(expectation_at(t, V, T) ==
          doctest::Approx(0.5 * 0.3 + 0.5 * 2.9).epsilon(1e-14));
}
