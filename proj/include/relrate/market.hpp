#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relrate/choice.hpp"
#include "relrate/decompose.hpp"
#include "relrate/tree.hpp"

namespace relrate {

// A frictionless market on an event tree: strictly positive price processes,
// one per asset, plus a common constraint set for the investment fractions.
// The default constraint set is the long-only simplex (no shorting, no
// leverage), which keeps every market viable.
struct Market {
    EventTree tree;
    std::vector<NodeProcess> prices;  // prices[asset][node] > 0
    Polytope constraints;             // subset of R^d, d = number of assets
};

Market make_market(EventTree tree, std::vector<NodeProcess> prices,
                   std::optional<Polytope> constraints = std::nullopt);

// Investment fractions per node (the decision taken at that node for the
// step to its children); leaf rows are ignored.
struct Strategy {
    std::vector<std::vector<double>> pi;
};

Strategy constant_strategy(const Market& market, const std::vector<double>& pi);

// Self-financing wealth from initial capital x0. Wealth that a step would
// drive negative is a constraint violation; the multiplier is floored at
// zero only within rounding (tolerance 1e-12 per step), otherwise wealth
// computation throws domain_error.
NodeProcess wealth(const Market& market, double x0, const Strategy& strategy);

// Growth-optimal portfolio reweighted by the martingale part L of a sampling
// decomposition: at every node with L > 0 it maximizes the L-weighted
// expected log return over the constraint set. Children with L = 0 drop out
// of the objective but keep their solvency constraints. Nodes with L = 0 get
// the zero portfolio. The certificate at a node is
//   max over candidate portfolios v of
//     E[ L_next (1 + <v, r>) | node ] / ( L(node) (1 + <pi_hat, r>) ) - 1,
// nonpositive at the exact optimum.
struct GrowthOptimal {
    Strategy pi;
    NodeProcess x_hat;         // wealth from capital 1 under pi
    double worst_certificate;  // max over optimized nodes
    long iterations;
};

GrowthOptimal numeraire_portfolio(const Market& market, const NodeProcess& l,
                                  double node_tol = 1e-11, int max_iter = 200000);

// Consumption streams are given by their per-node increments (nonnegative).
using StreamIncrements = std::vector<double>;

// Expected relative rate of return of stream C against stream G under the
// sampling measure p (an OptionalMeasure):
//   sum over p-charged nodes of p[node] * safe_div(dC, dG) - 1.
double rel_streams(const EventTree& tree, const OptionalMeasure& p,
                   const StreamIncrements& dc, const StreamIncrements& dg);

// The solution of the investment-consumption problem for capital x and
// sampling measure p: invest along the L-reweighted growth-optimal portfolio
// and consume the fraction increments of K.
struct ConsumptionPlan {
    CanonicalPair pair;
    GrowthOptimal growth;
    StreamIncrements dc;  // x * x_hat(node) * dK(node)
    double capital;
};

ConsumptionPlan optimal_consumption(const Market& market, const OptionalMeasure& p,
                                    double x, double node_tol = 1e-11);

// Sweeps financeable competitor streams (constant vertex strategies crossed
// with quarter-grid consumption schedules, plus random strategies and
// schedules) and evaluates rel_streams of each against the plan's stream.
struct SweepResult {
    double worst_rel;
    long n_streams;
    std::string worst_description;
};

SweepResult consumption_optimality_sweep(const Market& market,
                                         const ConsumptionPlan& plan,
                                         const OptionalMeasure& p,
                                         int n_random = 100,
                                         std::uint64_t seed = 20260815,
                                         long cap = 10000);

// Expected utility of a fraction schedule F (cumulative, nondecreasing,
// F <= 1, increments supported where dK > 0) against the sampling measure p:
//   sum over q-charged nodes of q[node] * U(dF/dK),  q = P L dK.
// Jensen bounds this by U(1), attained by F = K.
double utility_functional(const EventTree& tree, const OptionalMeasure& p,
                          const NodeProcess& f_cumulative,
                          const std::function<double(double)>& utility);

// Samples wealth at a random time T: builds the sampling measure of T, its
// decomposition and growth-optimal benchmark, and checks
//   E[ X_T / X_hat_T ] <= 1
// for constant vertex strategies and random strategies.
struct RandomTimeReport {
    double worst_expectation;
    bool pass;
    bool samples_at_running_max;  // T picks the running maximum of L on every path
    int n_strategies;
};

RandomTimeReport random_time_check(const Market& market, const RandomTime& T,
                                   int n_random = 100,
                                   std::uint64_t seed = 20260815,
                                   double tol = 1e-9, double node_tol = 1e-11);

}  // namespace relrate
