#pragma once

#include <vector>

#include "relrate/tree.hpp"

namespace relrate {

// Unit mass spread over the nodes of a tree: q[node] is the probability that
// the draw lands at that node (at that node's time, on paths through it).
using OptionalMeasure = std::vector<double>;

void check_optional_measure(const EventTree& tree, const OptionalMeasure& q,
                            double tol = 1e-9);

struct HProcess {
    NodeProcess dH;  // q[node] / P[node]
    NodeProcess H;   // running sums along paths
};

HProcess measure_to_H(const EventTree& tree, const OptionalMeasure& q);

// The canonical multiplicative split of a sampling process H into a
// nonnegative martingale L (value of remaining mass per unit of conditional
// probability) and an adapted nondecreasing K with range [0,1] (fraction of
// path mass already spent), linked by
//   L * (1 - K) = Z,   L * dK = dH,   q = P * L * dK,
// where Z = E[H_terminal | node] - H(node). L starts at 1; it is frozen once
// its information cell carries no future mass.
struct CanonicalPair {
    NodeProcess L;
    NodeProcess K;
    NodeProcess dK;
    NodeProcess H;
    NodeProcess dH;
    NodeProcess M;  // E[H_terminal | node]
    NodeProcess Z;  // M - H
};

// From a cumulative sampling process (validated: adapted, nondecreasing along
// paths, nonnegative, terminal expectation 1).
CanonicalPair decompose(const EventTree& tree, const NodeProcess& h_cumulative);

// Convenience: measure_to_H then decompose.
CanonicalPair decompose_measure(const EventTree& tree, const OptionalMeasure& q);

// Residuals of every structural property of a pair, each scaled by the size
// of the quantities compared (so tolerances are meaningful across mass
// scales). A freshly decomposed pair keeps all of these near machine zero.
struct PairReport {
    double root_l_error = 0.0;       // |L(root) - 1|
    double negativity_error = 0.0;   // most negative L, as a positive number
    double martingale_drift = 0.0;   // |E[L_next|node] - L| where Z(node) > 0
    double k_monotone_error = 0.0;   // negative part of dK, and |K - K_par - dK|
    double k_range_error = 0.0;      // breach of K in [0,1]
    double lk_identity_error = 0.0;  // |L (1 - K) - Z|
    double dh_identity_error = 0.0;  // |L dK - dH|
    double frozen_l_error = 0.0;     // |L - L_par| where K_par = 1
    double dk_at_dead_error = 0.0;   // |dK| where L = 0
    double leaf_exhaust_error = 0.0; // |L (1 - K)| at leaves
    double pathwise_error = 0.0;     // |sum_path L dK - H_terminal| per leaf

    double max_violation() const;
};

PairReport verify_pair(const EventTree& tree, const NodeProcess& h_cumulative,
                       const CanonicalPair& pair);

// q[node] = P[node] * L(node) * dK(node): inverts decompose_measure.
OptionalMeasure pair_to_measure(const EventTree& tree, const CanonicalPair& pair);

struct PerturbationRow {
    double eps;
    double k_gap;  // max |K_eps - K| over nodes whose parent cell is alive
    double l_gap;  // max |L_eps - L| over the same nodes
};

// Mixes H with a strictly increasing deterministic drift completed at the
// leaves, weight eps/(1+eps), and measures how far the perturbed pair drifts
// from the original on the region where the original still has future mass.
std::vector<PerturbationRow> perturbation_convergence(
    const EventTree& tree, const NodeProcess& h_cumulative,
    const std::vector<double>& eps_values);

}  // namespace relrate
