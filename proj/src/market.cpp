#include "relrate/market.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "relrate/detail/hull_opt.hpp"
#include "relrate/detail/lp.hpp"
#include "relrate/errors.hpp"
#include "relrate/static_core.hpp"

namespace relrate {

namespace {

constexpr double kSolvencyTol = 1e-9;
constexpr double kBox = 1e6;

std::vector<std::vector<double>> child_returns(const Market& market,
                                               const TreeNode& nd) {
    const std::size_t d = market.prices.size();
    std::vector<std::vector<double>> r(nd.children.size(),
                                       std::vector<double>(d, 0.0));
    for (std::size_t ci = 0; ci < nd.children.size(); ++ci) {
        std::size_t c = static_cast<std::size_t>(nd.children[ci]);
        for (std::size_t a = 0; a < d; ++a)
            r[ci][a] = market.prices[a][c] /
                           market.prices[a][static_cast<std::size_t>(nd.id)] -
                       1.0;
    }
    return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Candidate portfolios at a node: the vertices of the constraint set
// intersected with the per-child solvency halfspaces. Throws viability_error
// when the intersection admits a direction of unbounded weighted log growth.
std::vector<std::vector<double>> node_candidates(
    const Market& market, const std::vector<std::vector<double>>& returns,
    const std::vector<double>& growth_weights) {
    const std::size_t d = market.prices.size();
    const Polytope& K = market.constraints;

    if (!K.has_halfspace_form()) {
        const auto& verts = K.vertices();
        for (const auto& v : verts)
            for (const auto& r : returns)
                if (1.0 + dot(v, r) < -kSolvencyTol)
                    throw validation_error(
                        "market: a constraint vertex allows negative wealth; "
                        "supply the constraint set in halfspace form");
        return verts;
    }

    // Recession probe: a feasible direction along which the weighted log
    // return grows without bound makes the market non-viable.
    const bool nn = K.nonnegative();
    const std::size_t lp_dim = nn ? d : 2 * d;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    auto add_row = [&](const std::vector<double>& a, double rhs) {
        std::vector<double> row(lp_dim, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = a[j];
            if (!nn) row[d + j] = -a[j];
        }
        A.push_back(std::move(row));
        b.push_back(rhs);
    };
    for (const HalfSpace& h : K.halfspaces()) add_row(h.a, 0.0);
    for (const auto& r : returns) {
        std::vector<double> neg(d);
        for (std::size_t j = 0; j < d; ++j) neg[j] = -r[j];
        add_row(neg, 0.0);
    }
    A.push_back(std::vector<double>(lp_dim, 1.0));
    b.push_back(1.0);
    std::vector<double> c(lp_dim, 0.0);
    for (std::size_t ci = 0; ci < returns.size(); ++ci) {
        if (growth_weights[ci] <= 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) {
            c[j] += growth_weights[ci] * returns[ci][j];
            if (!nn) c[d + j] -= growth_weights[ci] * returns[ci][j];
        }
    }
    auto probe = detail::lp_maximize(c, A, b);
    if (probe.status != detail::LpStatus::optimal || probe.value > 1e-9)
        throw viability_error(
            "market: unbounded expected log growth, no optimal portfolio exists");

    std::vector<HalfSpace> rows = K.halfspaces();
    for (const auto& r : returns) {
        HalfSpace h{std::vector<double>(d), 1.0};
        for (std::size_t j = 0; j < d; ++j) h.a[j] = -r[j];
        rows.push_back(std::move(h));
    }
    for (std::size_t j = 0; j < d; ++j) {
        HalfSpace hi{std::vector<double>(d, 0.0), kBox};
        hi.a[j] = 1.0;
        rows.push_back(std::move(hi));
        if (!nn) {
            HalfSpace lo{std::vector<double>(d, 0.0), kBox};
            lo.a[j] = -1.0;
            rows.push_back(std::move(lo));
        }
    }
    Polytope eff = Polytope::from_halfspaces(d, std::move(rows), nn);
    return eff.vertices();
}

struct FractionSchedule {
    // Cumulative consumed fraction per node, supported on dK > 0.
    NodeProcess f;
    NodeProcess df;
};

FractionSchedule realize_schedule(const EventTree& tree, const NodeProcess& dk,
                                  const std::vector<double>& target_by_time) {
    FractionSchedule fs;
    fs.f.assign(tree.size(), 0.0);
    fs.df.assign(tree.size(), 0.0);
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        double prev = nd.parent < 0 ? 0.0 : fs.f[static_cast<std::size_t>(nd.parent)];
        if (dk[i] > 0.0) {
            double tgt = target_by_time[static_cast<std::size_t>(nd.time)];
            fs.f[i] = std::max(tgt, prev);
        } else {
            fs.f[i] = prev;
        }
        fs.df[i] = fs.f[i] - prev;
    }
    return fs;
}

}  // namespace

Market make_market(EventTree tree, std::vector<NodeProcess> prices,
                   std::optional<Polytope> constraints) {
    const std::size_t d = prices.size();
    for (const NodeProcess& s : prices) {
        if (s.size() != tree.size())
            throw validation_error("market: price process size does not match tree");
        for (double v : s)
            if (!std::isfinite(v) || v <= 0.0)
                throw validation_error("market: prices must be strictly positive");
    }
    Polytope cons = [&] {
        if (constraints.has_value()) {
            if (constraints->dim() != d)
                throw validation_error(
                    "market: constraint set dimension does not match asset count");
            return std::move(*constraints);
        }
        if (d == 0) return Polytope::from_vertices({{0.0}});  // placeholder, unused
        std::vector<Outcome> verts;
        verts.push_back(Outcome(d, 0.0));
        for (std::size_t j = 0; j < d; ++j) {
            Outcome e(d, 0.0);
            e[j] = 1.0;
            verts.push_back(std::move(e));
        }
        return Polytope::from_vertices(std::move(verts));
    }();
    return Market{std::move(tree), std::move(prices), std::move(cons)};
}

Strategy constant_strategy(const Market& market, const std::vector<double>& pi) {
    if (pi.size() != market.prices.size())
        throw validation_error("strategy: dimension does not match asset count");
    Strategy s;
    s.pi.assign(market.tree.size(), pi);
    return s;
}

NodeProcess wealth(const Market& market, double x0, const Strategy& strategy) {
    if (!(x0 >= 0.0) || !std::isfinite(x0))
        throw validation_error("wealth: initial capital must be nonnegative");
    if (strategy.pi.size() != market.tree.size())
        throw validation_error("wealth: strategy size does not match tree");
    const EventTree& tree = market.tree;
    NodeProcess x(tree.size(), 0.0);
    x[0] = x0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        if (nd.children.empty()) continue;
        auto rets = child_returns(market, nd);
        for (std::size_t ci = 0; ci < nd.children.size(); ++ci) {
            double m = 1.0 + dot(strategy.pi[i], rets[ci]);
            if (m < -1e-12)
                throw domain_error("wealth: strategy drives wealth negative");
            x[static_cast<std::size_t>(nd.children[ci])] = x[i] * std::max(m, 0.0);
        }
    }
    return x;
}

GrowthOptimal numeraire_portfolio(const Market& market, const NodeProcess& l,
                                  double node_tol, int max_iter) {
    const EventTree& tree = market.tree;
    check_node_process(tree, l);
    for (double v : l)
        if (v < 0.0)
            throw validation_error("numeraire_portfolio: weights must be nonnegative");
    const std::size_t d = market.prices.size();

    GrowthOptimal out;
    out.pi.pi.assign(tree.size(), std::vector<double>(d, 0.0));
    out.worst_certificate = 0.0;
    out.iterations = 0;

    for (std::size_t i = 0; i < tree.size() && d > 0; ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        if (nd.children.empty() || l[i] <= 0.0) continue;

        auto rets = child_returns(market, nd);
        std::vector<double> w(nd.children.size());
        double wsum = 0.0;
        for (std::size_t ci = 0; ci < nd.children.size(); ++ci) {
            std::size_t c = static_cast<std::size_t>(nd.children[ci]);
            w[ci] = tree.node(static_cast<int>(c)).trans_prob * l[c];
            wsum += w[ci];
        }
        if (wsum <= 0.0) continue;
        for (double& v : w) v /= wsum;

        auto cands = node_candidates(market, rets, w);
        std::vector<std::vector<double>> Y(rets.size(),
                                           std::vector<double>(cands.size()));
        for (std::size_t ci = 0; ci < rets.size(); ++ci)
            for (std::size_t k = 0; k < cands.size(); ++k)
                Y[ci][k] = std::max(0.0, 1.0 + dot(cands[k], rets[ci]));

        detail::HullOptResult sol;
        try {
            sol = detail::maximize_log_over_hull(Y, w, node_tol, max_iter);
        } catch (const validation_error& e) {
            throw viability_error(std::string("numeraire_portfolio: node ") +
                                  std::to_string(nd.id) + ": " + e.what());
        }
        if (sol.certificate > node_tol)
            throw numerical_error(
                "numeraire_portfolio: optimum not certified at node " +
                std::to_string(nd.id));
        out.worst_certificate = std::max(out.worst_certificate, sol.certificate);
        out.iterations += sol.iterations;
        for (std::size_t k = 0; k < cands.size(); ++k)
            for (std::size_t j = 0; j < d; ++j)
                out.pi.pi[i][j] += sol.lambda[k] * cands[k][j];
    }
    out.x_hat = wealth(market, 1.0, out.pi);
    return out;
}

double rel_streams(const EventTree& tree, const OptionalMeasure& p,
                   const StreamIncrements& dc, const StreamIncrements& dg) {
    check_optional_measure(tree, p);
    if (dc.size() != tree.size() || dg.size() != tree.size())
        throw validation_error("rel_streams: stream size does not match tree");
    for (std::size_t i = 0; i < tree.size(); ++i)
        if (dc[i] < 0.0 || dg[i] < 0.0 || !std::isfinite(dc[i]) ||
            !std::isfinite(dg[i]))
            throw validation_error("rel_streams: increments must be nonnegative");
    double s = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        if (p[i] <= 0.0) continue;
        double r = safe_div(dc[i], dg[i]);
        if (std::isinf(r)) return r;
        s += p[i] * r;
    }
    return s - 1.0;
}

ConsumptionPlan optimal_consumption(const Market& market, const OptionalMeasure& p,
                                    double x, double node_tol) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw validation_error("optimal_consumption: capital must be nonnegative");
    ConsumptionPlan plan;
    plan.pair = decompose_measure(market.tree, p);
    plan.growth = numeraire_portfolio(market, plan.pair.L, node_tol);
    plan.dc.assign(market.tree.size(), 0.0);
    for (std::size_t i = 0; i < market.tree.size(); ++i)
        plan.dc[i] = x * plan.growth.x_hat[i] * plan.pair.dK[i];
    plan.capital = x;
    return plan;
}

SweepResult consumption_optimality_sweep(const Market& market,
                                         const ConsumptionPlan& plan,
                                         const OptionalMeasure& p, int n_random,
                                         std::uint64_t seed, long cap) {
    const EventTree& tree = market.tree;
    const std::size_t d = market.prices.size();
    const double x = plan.capital;

    // Admissible constant vertex strategies (skip insolvent vertices).
    std::vector<Strategy> strategies;
    std::vector<std::string> names;
    if (d > 0) {
        const auto& verts = market.constraints.vertices();
        for (std::size_t k = 0; k < verts.size(); ++k) {
            Strategy s = constant_strategy(market, verts[k]);
            try {
                wealth(market, 1.0, s);
            } catch (const domain_error&) {
                continue;
            }
            strategies.push_back(std::move(s));
            names.push_back("vertex " + std::to_string(k));
        }
    } else {
        strategies.push_back(Strategy{std::vector<std::vector<double>>(
            tree.size(), std::vector<double>())});
        names.push_back("cash");
    }

    // Nondecreasing quarter-grid schedules over time levels.
    std::vector<std::vector<double>> targets;
    {
        std::vector<double> cur(static_cast<std::size_t>(tree.horizon()) + 1, 0.0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t t, int lvl) {
            if (t == cur.size()) {
                targets.push_back(cur);
                return;
            }
            for (int v = lvl; v <= 4; ++v) {
                cur[t] = 0.25 * v;
                rec(t + 1, v);
            }
        };
        rec(0, 0);
    }
    long grid_total = static_cast<long>(strategies.size()) *
                      static_cast<long>(targets.size());
    std::size_t stride = 1;
    if (grid_total > cap && cap > 0) {
        stride = static_cast<std::size_t>((grid_total + cap - 1) / cap);
    }

    SweepResult res{-1.0, 0, ""};
    auto consider = [&](const Strategy& s, const FractionSchedule& fs,
                        const std::string& name) {
        NodeProcess xw = wealth(market, 1.0, s);
        StreamIncrements dc(tree.size());
        for (std::size_t i = 0; i < tree.size(); ++i)
            dc[i] = x * xw[i] * fs.df[i];
        double r = rel_streams(tree, p, dc, plan.dc);
        ++res.n_streams;
        if (r > res.worst_rel) {
            res.worst_rel = r;
            res.worst_description = name;
        }
    };

    for (std::size_t si = 0; si < strategies.size(); ++si) {
        for (std::size_t ti = 0; ti < targets.size(); ti += stride) {
            FractionSchedule fs = realize_schedule(tree, plan.pair.dK, targets[ti]);
            consider(strategies[si], fs,
                     names[si] + ", grid " + std::to_string(ti));
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto& verts = d > 0 ? market.constraints.vertices()
                              : std::vector<Outcome>{};
    for (int k = 0; k < n_random; ++k) {
        Strategy s;
        s.pi.assign(tree.size(), std::vector<double>(d, 0.0));
        if (d > 0) {
            std::exponential_distribution<double> expo(1.0);
            for (std::size_t i = 0; i < tree.size(); ++i) {
                double tot = 0.0;
                std::vector<double> lam(verts.size());
                for (double& v : lam) {
                    v = expo(rng);
                    tot += v;
                }
                for (std::size_t vk = 0; vk < verts.size(); ++vk)
                    for (std::size_t j = 0; j < d; ++j)
                        s.pi[i][j] += (lam[vk] / tot) * verts[vk][j];
            }
        }
        FractionSchedule fs;
        fs.f.assign(tree.size(), 0.0);
        fs.df.assign(tree.size(), 0.0);
        for (std::size_t i = 0; i < tree.size(); ++i) {
            const TreeNode& nd = tree.node(static_cast<int>(i));
            double prev =
                nd.parent < 0 ? 0.0 : fs.f[static_cast<std::size_t>(nd.parent)];
            fs.f[i] = prev;
            if (plan.pair.dK[i] > 0.0) {
                double u = unif(rng);
                fs.f[i] = prev + u * (1.0 - prev);
            }
            fs.df[i] = fs.f[i] - prev;
        }
        consider(s, fs, "random " + std::to_string(k));
    }
    return res;
}

double utility_functional(const EventTree& tree, const OptionalMeasure& p,
                          const NodeProcess& f_cumulative,
                          const std::function<double(double)>& utility) {
    check_node_process(tree, f_cumulative);
    CanonicalPair pair = decompose_measure(tree, p);
    double s = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        double prev =
            nd.parent < 0 ? 0.0 : f_cumulative[static_cast<std::size_t>(nd.parent)];
        double df = f_cumulative[i] - prev;
        if (df < -1e-12)
            throw validation_error("utility_functional: schedule must be nondecreasing");
        if (f_cumulative[i] > 1.0 + 1e-12)
            throw validation_error("utility_functional: schedule must stay within 1");
        if (pair.dK[i] <= 0.0) {
            if (df > 1e-12)
                throw domain_error(
                    "utility_functional: schedule consumes where the sampling "
                    "measure never spends");
            continue;
        }
        double q = nd.prob * pair.L[i] * pair.dK[i];
        if (q <= 0.0) continue;
        s += q * utility(std::max(df, 0.0) / pair.dK[i]);
    }
    return s;
}

RandomTimeReport random_time_check(const Market& market, const RandomTime& T,
                                   int n_random, std::uint64_t seed, double tol,
                                   double node_tol) {
    const EventTree& tree = market.tree;
    check_random_time(tree, T);
    DualProjection dp = dual_optional_projection(tree, T);
    OptionalMeasure q(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i)
        q[i] = tree.node(static_cast<int>(i)).prob * dp.dH[i];
    CanonicalPair pair = decompose_measure(tree, q);
    GrowthOptimal growth = numeraire_portfolio(market, pair.L, node_tol);

    const std::size_t d = market.prices.size();
    std::vector<Strategy> strategies;
    if (d > 0) {
        for (const auto& v : market.constraints.vertices()) {
            Strategy s = constant_strategy(market, v);
            try {
                wealth(market, 1.0, s);
            } catch (const domain_error&) {
                continue;
            }
            strategies.push_back(std::move(s));
        }
        std::mt19937_64 rng(seed);
        std::exponential_distribution<double> expo(1.0);
        const auto& verts = market.constraints.vertices();
        for (int k = 0; k < n_random; ++k) {
            Strategy s;
            s.pi.assign(tree.size(), std::vector<double>(d, 0.0));
            for (std::size_t i = 0; i < tree.size(); ++i) {
                std::vector<double> lam(verts.size());
                double tot = 0.0;
                for (double& v : lam) {
                    v = expo(rng);
                    tot += v;
                }
                for (std::size_t vk = 0; vk < verts.size(); ++vk)
                    for (std::size_t j = 0; j < d; ++j)
                        s.pi[i][j] += (lam[vk] / tot) * verts[vk][j];
            }
            strategies.push_back(std::move(s));
        }
    } else {
        strategies.push_back(
            Strategy{std::vector<std::vector<double>>(tree.size())});
    }

    RandomTimeReport rep{0.0, true, true, static_cast<int>(strategies.size())};
    for (const Strategy& s : strategies) {
        NodeProcess xw = wealth(market, 1.0, s);
        double e = 0.0;
        for (std::size_t li = 0; li < T.size(); ++li) {
            int leaf = tree.leaves()[li];
            int a = tree.ancestor_at(leaf, T[li]);
            std::size_t ai = static_cast<std::size_t>(a);
            e += tree.node(leaf).prob *
                 safe_div(xw[ai], growth.x_hat[ai]);
        }
        rep.worst_expectation = std::max(rep.worst_expectation, e);
    }
    rep.pass = rep.worst_expectation <= 1.0 + tol;

    for (std::size_t li = 0; li < T.size() && rep.samples_at_running_max; ++li) {
        int leaf = tree.leaves()[li];
        int a = tree.ancestor_at(leaf, T[li]);
        double lmax = 0.0;
        for (int v = leaf; v >= 0; v = tree.node(v).parent)
            lmax = std::max(lmax, pair.L[static_cast<std::size_t>(v)]);
        if (std::abs(pair.L[static_cast<std::size_t>(a)] - lmax) >
            1e-12 * std::max(1.0, lmax))
            rep.samples_at_running_max = false;
    }
    return rep;
}

}  // namespace relrate
