#include "relrate/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "relrate/errors.hpp"

namespace relrate {

namespace {

// --- RNG stack: splitmix64 seeding, xoshiro256++ streams, ziggurat normals.

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

struct Xoshiro256pp {
    std::uint64_t s[4];

    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& v : s) v = sm.next();
    }

    std::uint64_t next() {
        std::uint64_t r = rotl(s[0] + s[3], 23) + s[0];
        std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return r;
    }

    double uniform() {  // (0,1): never 0, so logs stay finite
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }
};

// Ziggurat tables for the standard normal (128 strips).
struct ZigguratTables {
    double wn[128];
    double fn[128];
    std::uint32_t kn[128];

    ZigguratTables() {
        const double m1 = 2147483648.0;
        double dn = 3.442619855899, tn = dn;
        const double vn = 9.91256303526217e-3;
        double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

const ZigguratTables& zig() {
    static const ZigguratTables tables;
    return tables;
}

inline double normal(Xoshiro256pp& rng, const ZigguratTables& t) {
    for (;;) {
        std::int32_t hz = static_cast<std::int32_t>(rng.next() >> 32);
        std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
        std::uint32_t uz = hz < 0 ? static_cast<std::uint32_t>(
                                        -static_cast<std::int64_t>(hz))
                                  : static_cast<std::uint32_t>(hz);
        if (uz < t.kn[iz]) return hz * t.wn[iz];

        const double r = 3.442619855899;
        if (iz == 0) {  // tail beyond r
            double x, y;
            do {
                x = -std::log(rng.uniform()) / r;
                y = -std::log(rng.uniform());
            } while (y + y < x * x);
            return hz > 0 ? r + x : -(r + x);
        }
        double x = hz * t.wn[iz];
        if (t.fn[iz] + rng.uniform() * (t.fn[iz - 1] - t.fn[iz]) <
            std::exp(-0.5 * x * x))
            return x;
        // otherwise resample from the top
    }
}

struct KahanSum {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

void validate(const McConfig& cfg) {
    if (cfg.n_paths < 1) throw validation_error("simulate: n_paths must be positive");
    if (!(cfg.dt > 0.0)) throw validation_error("simulate: dt must be positive");
    if (!(cfg.horizon > 0.0))
        throw validation_error("simulate: horizon must be positive");
    if (!(cfg.sigma > 0.0)) throw validation_error("simulate: sigma must be positive");
    if (cfg.stop_level < 0.0 || cfg.stop_level >= 1.0)
        throw validation_error("simulate: stop level must lie in [0,1)");
    if (cfg.max_steps_per_path < 1)
        throw validation_error("simulate: step cap must be positive");
    for (double f : cfg.strategy_fractions)
        if (!(f >= 0.0) || !(f <= 1.0))
            throw validation_error("simulate: fractions must lie in [0,1]");
    if (cfg.store_paths) {
        long grid = static_cast<long>(cfg.horizon / cfg.dt) + 1;
        if (cfg.n_paths * grid > 4000000)
            throw validation_error("simulate: run too large to store full paths");
    }
}

}  // namespace

namespace {

struct WorkerTotals {
    long long steps = 0;
    long tail = 0;
};

void run_paths(const McConfig& cfg, PathEnsemble& out, std::size_t lo,
               std::size_t hi, WorkerTotals& totals) {
    const ZigguratTables& tables = zig();
    const std::size_t nf = cfg.strategy_fractions.size();
    const bool gbm = cfg.generator == McConfig::Generator::gbm_martingale;
    const long n_steps_fixed =
        gbm ? std::min<long>(static_cast<long>(std::llround(cfg.horizon / cfg.dt)),
                             cfg.max_steps_per_path)
            : cfg.max_steps_per_path;
    const double c1 = cfg.sigma * std::sqrt(cfg.dt);
    const double c0 = -0.5 * cfg.sigma * cfg.sigma * cfg.dt;
    const double sqrt_dt = std::sqrt(cfg.dt);
    const double barrier_r2 =
        cfg.stop_level > 0.0 ? 1.0 / (cfg.stop_level * cfg.stop_level)
                             : std::numeric_limits<double>::infinity();

    std::vector<double> xw(nf);

    for (std::size_t p = lo; p < hi; ++p) {
        Xoshiro256pp rng(cfg.seed + 0x9e3779b97f4a7c15ULL * (p + 1));
        double log_max = 0.0;  // includes t = 0 where L = 1
        double log_l = 0.0;
        double log_smin = 0.0;
        std::fill(xw.begin(), xw.end(), 1.0);
        for (std::size_t j = 0; j < nf; ++j) out.wealth_at_min[j][p] = 1.0;
        std::vector<double>* vals = nullptr;
        std::vector<double>* times = nullptr;
        if (cfg.store_paths) {
            vals = &out.path_values[p];
            times = &out.path_times[p];
            vals->push_back(1.0);
            times->push_back(0.0);
        }

        long steps = 0;
        if (gbm) {
            for (; steps < n_steps_fixed; ++steps) {
                double d = c1 * normal(rng, tables) + c0;
                log_l += d;
                if (log_l > log_max) log_max = log_l;
                if (nf > 0) {
                    double m = std::exp(-d);  // price step of S = 1/L
                    for (std::size_t j = 0; j < nf; ++j) {
                        double f = cfg.strategy_fractions[j];
                        xw[j] *= (1.0 - f) + f * m;
                    }
                }
                if (-log_l < log_smin) {
                    log_smin = -log_l;
                    for (std::size_t j = 0; j < nf; ++j)
                        out.wealth_at_min[j][p] = xw[j];
                }
                if (vals) {
                    vals->push_back(std::exp(log_l));
                    times->push_back(cfg.dt * static_cast<double>(steps + 1));
                }
            }
        } else {
            // 3d Brownian point; L = 1/|B|, S = |B|. The clock advances by
            // dt * |B|^2 per step so log L moves by about sqrt(dt) each step.
            double x = 1.0, y = 0.0, z = 0.0;
            double r2 = 1.0, r2min = 1.0, t = 0.0;
            for (; steps < n_steps_fixed; ++steps) {
                if (r2 >= barrier_r2 || t >= cfg.horizon) break;
                double sd = sqrt_dt * std::sqrt(r2);
                t += cfg.dt * r2;
                x += sd * normal(rng, tables);
                y += sd * normal(rng, tables);
                z += sd * normal(rng, tables);
                double r2n = x * x + y * y + z * z;
                if (r2n <= 0.0) r2n = 1e-300;  // unreachable in practice
                if (nf > 0) {
                    double m = std::sqrt(r2n / r2);
                    for (std::size_t j = 0; j < nf; ++j) {
                        double f = cfg.strategy_fractions[j];
                        xw[j] *= (1.0 - f) + f * m;
                    }
                }
                r2 = r2n;
                if (r2 < r2min) {
                    r2min = r2;
                    for (std::size_t j = 0; j < nf; ++j)
                        out.wealth_at_min[j][p] = xw[j];
                }
                if (vals) {
                    vals->push_back(1.0 / std::sqrt(r2));
                    times->push_back(t);
                }
            }
            log_l = -0.5 * std::log(r2);
            log_max = std::max(log_max, -0.5 * std::log(r2min));
            log_smin = 0.5 * std::log(r2min);
        }
        totals.steps += steps;

        // Exact completion of the supremum beyond the simulated span: from
        // level L the future supremum of a nonnegative local martingale that
        // converges to zero is L/U with U uniform.
        double tail = log_l - std::log(rng.uniform());
        if (tail > log_max) {
            log_max = tail;
            ++totals.tail;
        }
        out.log_sup[p] = log_max;
        out.log_terminal[p] = log_l;
        out.min_price[p] = std::exp(log_smin);
    }
}

}  // namespace

PathEnsemble simulate(const McConfig& cfg) {
    validate(cfg);
    PathEnsemble out;
    out.config = cfg;
    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    out.log_sup.resize(n);
    out.log_terminal.resize(n);
    out.min_price.resize(n);
    out.wealth_at_min.assign(cfg.strategy_fractions.size(),
                             std::vector<double>(n, 1.0));
    if (cfg.store_paths) {
        out.path_values.resize(n);
        out.path_times.resize(n);
    }

    int threads = std::max(1, cfg.threads);
    threads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(threads), n));
    if (threads == 1) {
        WorkerTotals totals;
        run_paths(cfg, out, 0, n, totals);
        out.total_steps = totals.steps;
        out.tail_completion_count = totals.tail;
        return out;
    }
    std::vector<WorkerTotals> totals(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + static_cast<std::size_t>(threads) - 1) /
                              static_cast<std::size_t>(threads);
    for (int k = 0; k < threads; ++k) {
        std::size_t lo = static_cast<std::size_t>(k) * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&cfg, &out, lo, hi, &totals, k] {
            run_paths(cfg, out, lo, hi, totals[static_cast<std::size_t>(k)]);
        });
    }
    for (auto& th : pool) th.join();
    for (const WorkerTotals& t : totals) {
        out.total_steps += t.steps;
        out.tail_completion_count += t.tail;
    }
    return out;
}

std::vector<DoobRow> doob_identity_check(const PathEnsemble& ensemble,
                                         const std::vector<double>& gammas) {
    const std::size_t n = ensemble.log_sup.size();
    if (n == 0) throw validation_error("doob_identity_check: empty ensemble");
    std::vector<DoobRow> rows;
    for (double g : gammas) {
        if (!(g > 1.0))
            throw validation_error("doob_identity_check: gamma must exceed 1");
        double lg = std::log(g);
        std::size_t hits = 0;
        for (double v : ensemble.log_sup)
            if (v >= lg) ++hits;
        double est = static_cast<double>(hits) / static_cast<double>(n);
        double se = std::sqrt(std::max(est * (1.0 - est), 1e-300) /
                              static_cast<double>(n));
        rows.push_back({g, est, 1.0 / g, se, std::abs(est - 1.0 / g)});
    }
    return rows;
}

ExpLawReport exp_law_check(const PathEnsemble& ensemble, double mean_band,
                           double ks_slack) {
    const std::size_t n = ensemble.log_sup.size();
    if (n == 0) throw validation_error("exp_law_check: empty ensemble");

    KahanSum mean_acc, var_acc;
    bool k_ok = true;
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ls = ensemble.log_sup[i];
        mean_acc.add(ls);
        u[i] = std::exp(-ls);  // 1/sup L, uniform under the exact law
        double k_term = 1.0 - u[i];
        if (!(k_term >= 0.0) || !(k_term < 1.0) || !std::isfinite(ls))
            k_ok = false;
    }
    double mean = mean_acc.sum / static_cast<double>(n);
    for (double ls : ensemble.log_sup) var_acc.add((ls - mean) * (ls - mean));
    double sd = std::sqrt(var_acc.sum / static_cast<double>(n > 1 ? n - 1 : 1));

    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        double lo = static_cast<double>(i) / static_cast<double>(n);
        ks = std::max({ks, std::abs(u[i] - hi), std::abs(u[i] - lo)});
    }

    ExpLawReport rep;
    rep.mean_log_sup = mean;
    rep.mean_std_error = sd / std::sqrt(static_cast<double>(n));
    rep.ks_statistic = ks;
    rep.ks_bound = 1.63 / std::sqrt(static_cast<double>(n)) + ks_slack;
    rep.mean_ok = std::abs(mean - 1.0) <= mean_band;
    rep.ks_ok = ks < rep.ks_bound;
    rep.k_terminal_ok = k_ok;
    rep.tail_completion_fraction =
        static_cast<double>(ensemble.tail_completion_count) /
        static_cast<double>(n);
    return rep;
}

std::vector<double> sample_normals(std::uint64_t seed, std::size_t n) {
    Xoshiro256pp rng(seed);
    const ZigguratTables& tables = zig();
    std::vector<double> out(n);
    for (auto& v : out) v = normal(rng, tables);
    return out;
}

MinTimeReport min_time_market_check(const PathEnsemble& ensemble, double band) {
    const std::size_t n = ensemble.min_price.size();
    if (n == 0) throw validation_error("min_time_market_check: empty ensemble");

    KahanSum acc;
    for (double v : ensemble.min_price) acc.add(v);
    double mean = acc.sum / static_cast<double>(n);
    KahanSum var;
    for (double v : ensemble.min_price) var.add((v - mean) * (v - mean));
    double se = std::sqrt(var.sum / static_cast<double>(n > 1 ? n - 1 : 1)) /
                std::sqrt(static_cast<double>(n));

    MinTimeReport rep;
    rep.mean_min_price = mean;
    rep.min_price_std_error = se;
    rep.target = 0.5;
    rep.price_ok = std::abs(mean - 0.5) <= band;

    for (std::size_t j = 0; j < ensemble.wealth_at_min.size(); ++j) {
        const auto& w = ensemble.wealth_at_min[j];
        KahanSum wa;
        for (double v : w) wa.add(v);
        double wm = wa.sum / static_cast<double>(n);
        KahanSum wv;
        for (double v : w) wv.add((v - wm) * (v - wm));
        double wse = std::sqrt(wv.sum / static_cast<double>(n > 1 ? n - 1 : 1)) /
                     std::sqrt(static_cast<double>(n));
        double frac = ensemble.config.strategy_fractions[j];
        bool pass;
        if (frac == 0.0)
            pass = wm == 1.0;  // cash is exact
        else
            pass = wm <= 1.0 + 3.0 * wse;
        rep.rows.push_back({frac, wm, wse, pass});
    }
    return rep;
}

}  // namespace relrate
