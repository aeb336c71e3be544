#pragma once

#include <cstdint>
#include <vector>

namespace relrate {

// Path laws for the continuous-time checks. Both start at L = 1.
//   gbm_martingale : L_t = exp(sigma W_t - sigma^2 t / 2), a true martingale
//                    converging to 0, simulated exactly on a fixed grid.
//   inverse_bessel3: L_t = 1 / |B_t|, B a 3-dimensional Brownian motion from
//                    a unit vector; the classic strictly positive local
//                    martingale vanishing at infinity. Steps are exact in
//                    distribution; the clock is state-adaptive so that each
//                    step moves log L by roughly sqrt(dt).
struct McConfig {
    enum class Generator { gbm_martingale, inverse_bessel3 };
    Generator generator = Generator::gbm_martingale;
    long n_paths = 0;
    double dt = 1e-3;       // fixed step (gbm) or per-step log-variance (bessel)
    double horizon = 20.0;  // simulated time span
    double sigma = 1.0;     // gbm volatility
    std::uint64_t seed = 1;
    double stop_level = 0.004;        // bessel: stop once L <= this barrier
    long max_steps_per_path = 2000000;
    // Rebalanced fractions held in the risky price S = 1/L; when non-empty,
    // each path records the wealth of these strategies at the running
    // minimum of S.
    std::vector<double> strategy_fractions;
    bool store_paths = false;  // keep full grids (small runs only)
    // Worker threads. Paths own independent generator streams and fixed
    // output slots, so results are identical for any thread count.
    int threads = 1;
};

// Per-path summaries. The supremum of L over all time is completed exactly:
// from the terminal value the future supremum of a nonnegative local
// martingale converging to zero is terminal/U with U uniform, so one extra
// draw removes the horizon truncation entirely. The grid maximum remains
// subject to the usual discrete-monitoring undershoot.
struct PathEnsemble {
    McConfig config;
    std::vector<double> log_sup;      // log of the completed supremum of L
    std::vector<double> log_terminal; // log L at the stop (horizon or barrier)
    std::vector<double> min_price;    // grid minimum of S = 1/L
    std::vector<std::vector<double>> wealth_at_min;  // [fraction][path]
    long tail_completion_count = 0;   // paths whose sup came from the tail draw
    long long total_steps = 0;
    std::vector<std::vector<double>> path_values;  // only when store_paths
    std::vector<std::vector<double>> path_times;
};

PathEnsemble simulate(const McConfig& config);

// P[sup L >= gamma] against the maximal-inequality value 1/gamma.
struct DoobRow {
    double gamma;
    double estimate;
    double target;
    double std_error;
    double abs_error;
};

std::vector<DoobRow> doob_identity_check(const PathEnsemble& ensemble,
                                         const std::vector<double>& gammas);

// 1/sup L is uniform on (0,1), equivalently log sup L is standard
// exponential and the terminal spent fraction K = 1 - 1/sup L is uniform and
// strictly below 1 on every path.
struct ExpLawReport {
    double mean_log_sup;
    double mean_std_error;
    double ks_statistic;
    double ks_bound;
    bool mean_ok;
    bool ks_ok;
    bool k_terminal_ok;
    double tail_completion_fraction;
};

ExpLawReport exp_law_check(const PathEnsemble& ensemble, double mean_band = 0.03,
                           double ks_slack = 0.01);

// Sampling at the minimum-price time: E[S_T] = 1/2, cash stays at 1, and no
// rebalanced long-only strategy beats its initial capital in expectation.
struct MinTimeRow {
    double fraction;
    double mean_wealth;
    double std_error;
    bool pass;
};

struct MinTimeReport {
    double mean_min_price;
    double min_price_std_error;
    double target;  // 0.5
    bool price_ok;
    std::vector<MinTimeRow> rows;
};

MinTimeReport min_time_market_check(const PathEnsemble& ensemble,
                                    double band = 0.02);

// Diagnostic stream of standard normal draws from the simulation generator,
// for distributional tests of the sampler itself.
std::vector<double> sample_normals(std::uint64_t seed, std::size_t n);

}  // namespace relrate
