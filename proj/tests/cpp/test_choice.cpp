#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "relrate/choice.hpp"
#include "relrate/detail/lp.hpp"
#include "relrate/errors.hpp"
#include "relrate/static_core.hpp"

using namespace relrate;

TEST_CASE("simplex solver on known programs") {
    {
        detail::LpResult r = detail::lp_maximize({3.0, 2.0},
                                                 {{1.0, 1.0}, {1.0, 3.0}},
                                                 {4.0, 6.0});
        REQUIRE(r.status == detail::LpStatus::optimal);
        CHECK(r.value == doctest::Approx(12.0).epsilon(1e-12));
        CHECK(r.x[0] == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(r.x[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    {
        // a negative right-hand side exercises the two-phase start
        detail::LpResult r = detail::lp_maximize({1.0}, {{-1.0}, {1.0}}, {-2.0, 5.0});
        REQUIRE(r.status == detail::LpStatus::optimal);
        CHECK(r.value == doctest::Approx(5.0).epsilon(1e-12));
    }
    {
        detail::LpResult r = detail::lp_maximize({1.0}, {{1.0}, {-1.0}}, {1.0, -3.0});
        CHECK(r.status == detail::LpStatus::infeasible);
    }
    {
        detail::LpResult r = detail::lp_maximize({1.0, 1.0}, {{1.0, -1.0}}, {1.0});
        CHECK(r.status == detail::LpStatus::unbounded);
    }
}

TEST_CASE("polytope construction and membership") {
    Polytope simplex = Polytope::full_simplex({0.5, 2.0});
    const auto& verts = simplex.vertices();
    REQUIRE(verts.size() == 3);  // origin plus one vertex per axis
    CHECK(simplex.contains({0.5, 0.1}));
    CHECK_FALSE(simplex.contains({3.0, 0.0}));

    std::vector<HalfSpace> box;
    for (std::size_t i = 0; i < 2; ++i) {
        HalfSpace h;
        h.a.assign(2, 0.0);
        h.a[i] = 1.0;
        h.b = 1.0;
        box.push_back(h);
    }
    Polytope square = Polytope::from_halfspaces(2, box);
    CHECK(square.vertices().size() == 4);
    CHECK(square.contains({1.0, 1.0}));
    CHECK_FALSE(square.contains({1.1, 0.0}));

    Polytope hull = Polytope::from_vertices({{2.0, 0.0}, {0.0, 2.0}});
    CHECK(hull.contains({1.0, 1.0}));
    CHECK_FALSE(hull.contains({1.5, 1.5}));

    // unbounded halfspace forms cannot be vertex-enumerated
    Polytope free = Polytope::from_halfspaces(2, {});
    CHECK_THROWS_AS(free.vertices(), validation_error);
}

TEST_CASE("log optimal selections on known sets") {
    FiniteSpace sp({0.2, 0.5, 0.3});

    SUBCASE("budget simplex: the closed form is weight over price") {
        std::vector<double> mu = {0.5, 2.0, 1.25};
        auto res = log_optimal(sp, Polytope::full_simplex(mu), 1e-11);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(res.f_hat[i] ==
                  doctest::Approx(sp.weight(i) / mu[i]).epsilon(1e-9));
        CHECK(res.certificate <= 1e-11);
        // every vertex compares unfavourably against the optimum
        Polytope set = Polytope::full_simplex(mu);
        for (const auto& v : set.vertices())
            CHECK(rel(sp, v, res.f_hat) <= 1e-9);
    }

    SUBCASE("unit box: the top corner dominates everything") {
        std::vector<HalfSpace> rows;
        for (std::size_t i = 0; i < 3; ++i) {
            HalfSpace h;
            h.a.assign(3, 0.0);
            h.a[i] = 1.0;
            h.b = 1.0;
            rows.push_back(h);
        }
        auto res = log_optimal(sp, Polytope::from_halfspaces(3, rows), 1e-11);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(res.f_hat[i] == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("collinear vertices: unique payoff, non-unique coefficients") {
        FiniteSpace half({0.5, 0.5});
        auto res = log_optimal(
            half, Polytope::from_vertices({{2.0, 0.0}, {0.0, 2.0}, {1.0, 1.0}}),
            1e-11);
        CHECK(res.f_hat[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(res.f_hat[1] == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("coordinates forced to zero stay out of the objective") {
        FiniteSpace half({0.5, 0.5});
        auto res = log_optimal(half,
                               Polytope::from_vertices({{1.0, 0.0}, {2.0, 0.0}}),
                               1e-11);
        CHECK(res.f_hat[0] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(res.f_hat[1] == 0.0);
        REQUIRE(res.zero_coordinates.size() == 1);
        CHECK(res.zero_coordinates[0] == 1);
    }

    SUBCASE("negative payoffs are rejected") {
        CHECK_THROWS_AS(
            log_optimal(sp, Polytope::from_vertices(
                                {{1.0, 1.0, 1.0}, {1.0, -0.5, 1.0}})),
            validation_error);
    }
}

TEST_CASE("simplex position classification") {
    std::vector<double> mu = {0.5, 2.0};
    Outcome maximal = {1.0, 0.25};  // scale = 0.5 + 0.5 = 1
    auto cls = simplex_classify(mu, maximal);
    CHECK(cls.position == SimplexPosition::maximal);
    CHECK(cls.scale == doctest::Approx(1.0).epsilon(1e-14));

    Outcome inner = {0.5, 0.125};
    auto cls_in = simplex_classify(mu, inner);
    CHECK(cls_in.position == SimplexPosition::interior);
    CHECK(cls_in.scale == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cls_in.maximal_representative[0] == doctest::Approx(1.0).epsilon(1e-12));

    Outcome outer = {2.0, 0.5};
    CHECK(simplex_classify(mu, outer).position == SimplexPosition::exterior);
}

TEST_CASE("probability recovery round trip") {
    FiniteSpace sp({0.3, 0.2, 0.5});
    auto rec = recover_probability(oracle_from_space(sp), 3, 20, 404);
    REQUIRE(rec.consistent);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(rec.probability[i] == doctest::Approx(sp.weight(i)).epsilon(1e-8));
    CHECK(rec.max_regeneration_error <= 1e-8);
}

TEST_CASE("axiom violations are reported, not hidden") {
    // spends the whole budget on the cheapest atom
    ChoiceOracle greedy = [](const std::vector<double>& mu) {
        std::size_t j = 0;
        for (std::size_t i = 1; i < mu.size(); ++i)
            if (mu[i] < mu[j]) j = i;
        Outcome f(mu.size(), 0.0);
        f[j] = 1.0 / mu[j];
        return f;
    };
    auto rec = recover_probability(greedy, 3, 5, 7);
    CHECK_FALSE(rec.consistent);
    CHECK_FALSE(rec.violation.empty());

    // leaves part of the budget unspent
    ChoiceOracle wasteful = [](const std::vector<double>& mu) {
        Outcome f(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i)
            f[i] = 1.0 / (mu[i] * static_cast<double>(mu.size() + 1));
        return f;
    };
    auto rec2 = recover_probability(wasteful, 3, 5, 8);
    CHECK_FALSE(rec2.consistent);
}

TEST_CASE("log completion of the preference order") {
    FiniteSpace sp({0.4, 0.6});
    CHECK(log_rel(sp, {2.0, 1.0}, {1.0, 1.0}) ==
          doctest::Approx(0.4 * std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(log_rel(sp, {0.0, 1.0}, {1.0, 1.0}), domain_error);
    // totality: any two strictly positive payoffs are ordered
    Outcome f = {3.0, 0.4}, g = {0.5, 2.0};
    double fg = log_rel(sp, f, g);
    CHECK(log_rel(sp, g, f) == doctest::Approx(-fg).epsilon(1e-12));
}
