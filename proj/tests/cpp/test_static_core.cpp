#include <cmath>
#include <limits>

#include "doctest.h"
#include "relrate/errors.hpp"
#include "relrate/static_core.hpp"

using namespace relrate;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("safe_div boundary conventions") {
    CHECK(safe_div(6.0, 3.0) == 2.0);
    CHECK(safe_div(1.0, 0.0) == kInf);
    CHECK(safe_div(0.0, 0.0) == 1.0);
    CHECK(safe_div(0.0, 2.0) == 0.0);
}

TEST_CASE("finite space validation") {
    CHECK_THROWS_AS(FiniteSpace({0.5, 0.6}), validation_error);
    CHECK_THROWS_AS(FiniteSpace({1.5, -0.5}), validation_error);
    CHECK_THROWS_AS(FiniteSpace({0.0, 1.0}), validation_error);
    CHECK_THROWS_AS(FiniteSpace({}), validation_error);
    CHECK_THROWS_AS(FiniteSpace({0.5, 0.5}, {"only one"}), validation_error);
    FiniteSpace sp({0.25, 0.75});
    CHECK(sp.expectation({4.0, 8.0}) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK_THROWS_AS(check_outcome(sp, {1.0, -1.0}), validation_error);
    CHECK_THROWS_AS(check_outcome(sp, {1.0}), validation_error);
    CHECK_THROWS_AS(check_outcome(sp, {1.0, 0.0}, true), validation_error);
}

TEST_CASE("relative rate basics") {
    FiniteSpace sp({0.4, 0.6});
    CHECK(rel(sp, {1.0, 1.0}, {1.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rel(sp, {2.0, 2.0}, {1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    // a payoff positive where the reference vanishes has infinite rate
    CHECK(rel(sp, {1.0, 1.0}, {0.0, 1.0}) == kInf);
    // both zero on an atom: that atom contributes its weight
    CHECK(rel(sp, {0.0, 2.0}, {0.0, 1.0}) ==
          doctest::Approx(0.4 + 0.6 * 2.0 - 1.0).epsilon(1e-15));
    // the rate floor is -1, reached against a payoff that is zero a.s.
    CHECK(rel(sp, {0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("mutual weak preference forces equality") {
    FiniteSpace sp({0.3, 0.7});
    CHECK(compare(sp, {1.0, 2.0}, {1.0, 2.0}) == Comparison::equivalent);
    // strict sharpening: for distinct f, g the reverse rate exceeds the
    // negated forward rate, so mutual preference is impossible
    Outcome f = {2.0, 1.0}, g = {1.0, 2.0};
    CHECK(rel(sp, g, f) > -rel(sp, f, g));
    CHECK(rel(sp, f, g) > -rel(sp, g, f));
    CHECK(compare(sp, {2.0, 2.0}, {1.0, 1.0}) == Comparison::first_preferred);
    CHECK(compare(sp, {1.0, 1.0}, {2.0, 2.0}) == Comparison::second_preferred);
}

TEST_CASE("pinned counterexample values") {
    struct Frozen {
        double p;
        double inc_fg, inc_gf;   // rates of the incomparable pair
        double triple_fh;        // strict gap across the intransitive triple
        double flip;             // rel(g+1 | f+1) after adding the sure unit
        long level;              // minimal pooling level
        double level_rel;        // rate at that level
    };
    const Frozen rows[] = {
        {0.1, 0.81, 0.01, 4.5, -0.035885489001388826, 2, -0.03896103896103896},
        {0.3, 0.49, 0.09, 1.1666666666666667, -0.04368882370996897, 2,
         -0.07023411371237458},
        {0.5, 0.25, 0.25, 0.5, -0.015384615384615385, 2, -0.06666666666666667},
    };
    for (const Frozen& r : rows) {
        CAPTURE(r.p);
        CounterexampleSuite s = counterexample_suite(r.p);
        const FiniteSpace& sp = s.space;

        CHECK(rel(sp, s.incomparable_f, s.incomparable_g) ==
              doctest::Approx(r.inc_fg).epsilon(1e-13));
        CHECK(rel(sp, s.incomparable_g, s.incomparable_f) ==
              doctest::Approx(r.inc_gf).epsilon(1e-13));
        CHECK(s.incomparable_rel_fg == doctest::Approx(r.inc_fg).epsilon(1e-13));
        CHECK(s.incomparable_rel_gf == doctest::Approx(r.inc_gf).epsilon(1e-13));
        CHECK(compare(sp, s.incomparable_f, s.incomparable_g) ==
              Comparison::incomparable);

        CHECK(std::abs(rel(sp, s.triple_f, s.triple_g)) < 1e-12);
        CHECK(std::abs(rel(sp, s.triple_g, s.triple_h)) < 1e-12);
        CHECK(rel(sp, s.triple_f, s.triple_h) ==
              doctest::Approx(r.triple_fh).epsilon(1e-13));

        Outcome f1 = s.flip_f, g1 = s.flip_g;
        for (auto& v : f1) v += 1.0;
        for (auto& v : g1) v += 1.0;
        CHECK(std::abs(rel(sp, s.flip_f, s.flip_g)) < 1e-12);
        CHECK(rel(sp, g1, f1) == doctest::Approx(r.flip).epsilon(1e-12));
        CHECK(rel(sp, g1, f1) < 0.0);

        InsuranceResult ins = insurance_level(sp, s.flip_f, s.flip_g);
        CHECK(ins.level == r.level);
        CHECK(ins.rel_at_level == doctest::Approx(r.level_rel).epsilon(1e-12));
        CHECK(ins.rel_at_level < 0.0);
    }
}

TEST_CASE("numeraire invariance of the rate") {
    FiniteSpace sp({0.35, 0.65});
    Outcome f = {3.0, 0.5}, g = {1.0, 2.0}, h = {0.7, 1.9};
    Outcome fh = f, gh = g;
    for (std::size_t i = 0; i < 2; ++i) {
        fh[i] /= h[i];
        gh[i] /= h[i];
    }
    CHECK(rel(sp, fh, gh) == doctest::Approx(rel(sp, f, g)).epsilon(1e-14));
}

TEST_CASE("preference cycles force equality") {
    FiniteSpace sp({0.5, 0.5});
    Outcome a = {1.0, 2.0};
    ChainReport closed = chain_check(sp, {a, a, a});
    CHECK(closed.links_ok);
    CHECK(closed.all_equal);
    CHECK(closed.max_deviation == 0.0);

    CounterexampleSuite s = counterexample_suite(0.3);
    ChainReport broken =
        chain_check(s.space, {s.incomparable_f, s.incomparable_g, s.incomparable_f});
    CHECK_FALSE(broken.links_ok);
    CHECK(broken.failing_link == 0);

    CHECK_THROWS_AS(chain_check(sp, {a, {2.0, 1.0}}), validation_error);
}

TEST_CASE("insurance scan needs a strictly better region") {
    FiniteSpace sp({0.5, 0.5});
    // the claim never strictly exceeds the cover: no level works
    CHECK_THROWS_AS(insurance_level(sp, {1.0, 1.0}, {2.0, 2.0}), domain_error);
    CHECK_THROWS_AS(insurance_level(sp, {1.0, 1.0}, {1.0, 1.0}), domain_error);
}
