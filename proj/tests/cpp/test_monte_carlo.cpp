#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "relrate/errors.hpp"
#include "relrate/monte_carlo.hpp"

using namespace relrate;

TEST_CASE("normal sampler moments and distribution") {
    const std::size_t n = 200000;
    std::vector<double> x = sample_normals(314159, n);
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        m1 += v;
        m2 += v * v;
        m3 += v * v * v;
        m4 += v * v * v * v;
    }
    double dn = static_cast<double>(n);
    m1 /= dn;
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;
    CHECK(std::abs(m1) < 0.01);
    CHECK(std::abs(m2 - 1.0) < 0.02);
    CHECK(std::abs(m3) < 0.05);
    CHECK(std::abs(m4 - 3.0) < 0.15);

    // distribution-level agreement, sensitive to table mistakes
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double cdf = 0.5 * std::erfc(-x[i] / std::sqrt(2.0));
        double hi = static_cast<double>(i + 1) / dn;
        double lo = static_cast<double>(i) / dn;
        ks = std::max({ks, std::abs(cdf - hi), std::abs(cdf - lo)});
    }
    CHECK(ks < 1.63 / std::sqrt(dn) + 0.002);
}

TEST_CASE("simulation config validation") {
    McConfig cfg;
    cfg.n_paths = 0;
    CHECK_THROWS_AS(simulate(cfg), validation_error);
    cfg.n_paths = 10;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(simulate(cfg), validation_error);
    cfg.dt = 1e-3;
    cfg.stop_level = 1.0;
    CHECK_THROWS_AS(simulate(cfg), validation_error);
    cfg.stop_level = 0.0;
    cfg.strategy_fractions = {1.5};
    CHECK_THROWS_AS(simulate(cfg), validation_error);
}

TEST_CASE("identical results for any thread count") {
    McConfig cfg;
    cfg.generator = McConfig::Generator::inverse_bessel3;
    cfg.n_paths = 200;
    cfg.dt = 1e-3;
    cfg.horizon = 5.0;
    cfg.seed = 12345;
    cfg.stop_level = 0.01;
    cfg.strategy_fractions = {0.5};
    PathEnsemble serial = simulate(cfg);
    cfg.threads = 3;
    PathEnsemble parallel = simulate(cfg);
    CHECK(serial.log_sup == parallel.log_sup);
    CHECK(serial.log_terminal == parallel.log_terminal);
    CHECK(serial.min_price == parallel.min_price);
    CHECK(serial.wealth_at_min == parallel.wealth_at_min);
    CHECK(serial.total_steps == parallel.total_steps);
}

TEST_CASE("exponential drift of the martingale logarithm") {
    McConfig cfg;
    cfg.n_paths = 2000;
    cfg.dt = 1e-2;
    cfg.horizon = 5.0;
    cfg.seed = 66;
    PathEnsemble ens = simulate(cfg);
    double mean = 0.0;
    for (double v : ens.log_terminal) mean += v;
    mean /= static_cast<double>(cfg.n_paths);
    // log L_t has mean -t/2 at unit volatility
    CHECK(std::abs(mean + 2.5) < 0.2);
    for (std::size_t i = 0; i < ens.log_sup.size(); ++i) {
        CHECK(ens.log_sup[i] >= ens.log_terminal[i]);
        CHECK(ens.log_sup[i] >= 0.0);
    }
}

TEST_CASE("maximum law on a modest run") {
    McConfig cfg;
    cfg.n_paths = 2000;
    cfg.dt = 2.5e-4;  // keeps the discrete-monitoring bias well inside the band
    cfg.horizon = 20.0;
    cfg.seed = 4242;
    PathEnsemble ens = simulate(cfg);
    ExpLawReport rep = exp_law_check(ens, 0.1, 0.01);
    CHECK(rep.mean_ok);
    CHECK(rep.ks_ok);
    CHECK(rep.k_terminal_ok);
    CHECK(rep.tail_completion_fraction > 0.0);

    auto rows = doob_identity_check(ens, {2.0});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].target == 0.5);
    CHECK(rows[0].abs_error < 0.05);
    CHECK_THROWS_AS(doob_identity_check(ens, {0.5}), validation_error);
}

TEST_CASE("wealth snapshots at the running price minimum") {
    McConfig cfg;
    cfg.n_paths = 3000;
    cfg.dt = 1e-3;
    cfg.horizon = 10.0;
    cfg.seed = 777;
    cfg.strategy_fractions = {0.0, 1.0};
    PathEnsemble ens = simulate(cfg);
    MinTimeReport rep = min_time_market_check(ens, 0.05);
    REQUIRE(rep.rows.size() == 2);
    // cash never moves, so its mean is exactly one
    CHECK(rep.rows[0].mean_wealth == 1.0);
    CHECK(rep.rows[0].pass);
    // full investment at the minimum equals the minimum price itself
    for (std::size_t p = 0; p < ens.min_price.size(); ++p)
        CHECK(ens.wealth_at_min[1][p] ==
              doctest::Approx(ens.min_price[p]).epsilon(1e-9));
}
