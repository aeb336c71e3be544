#include "relrate/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "relrate/errors.hpp"

namespace relrate {

namespace {

double scaled_residual(double lhs, double rhs) {
    return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace

void check_optional_measure(const EventTree& tree, const OptionalMeasure& q,
                            double tol) {
    if (q.size() != tree.size())
        throw validation_error("optional measure: size does not match tree");
    double total = 0.0;
    for (double v : q) {
        if (!std::isfinite(v) || v < 0.0)
            throw validation_error("optional measure: masses must be nonnegative");
        total += v;
    }
    if (std::abs(total - 1.0) > tol)
        throw validation_error("optional measure: total mass must be 1");
}

HProcess measure_to_H(const EventTree& tree, const OptionalMeasure& q) {
    check_optional_measure(tree, q);
    HProcess hp;
    hp.dH.resize(tree.size());
    hp.H.resize(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        hp.dH[i] = q[i] / nd.prob;
        hp.H[i] = (nd.parent < 0 ? 0.0 : hp.H[static_cast<std::size_t>(nd.parent)]) +
                  hp.dH[i];
    }
    return hp;
}

CanonicalPair decompose(const EventTree& tree, const NodeProcess& h) {
    check_node_process(tree, h);
    CanonicalPair cp;
    const std::size_t n = tree.size();
    cp.H = h;
    cp.dH.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        double prev = nd.parent < 0 ? 0.0 : h[static_cast<std::size_t>(nd.parent)];
        cp.dH[i] = h[i] - prev;
        if (cp.dH[i] < -1e-12)
            throw validation_error("decompose: sampling process must be nondecreasing");
        cp.dH[i] = std::max(cp.dH[i], 0.0);
        if (h[i] < -1e-12)
            throw validation_error("decompose: sampling process must be nonnegative");
    }

    // Remaining mass Z as the backward sum of future increments: a sum of
    // nonnegative terms, so cells with no mass left come out exactly zero
    // instead of as cancellation noise, and the dead-cell branches below
    // trigger exactly where they should.
    cp.Z.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        for (int c : nd.children) {
            std::size_t ci = static_cast<std::size_t>(c);
            cp.Z[i] += tree.node(c).trans_prob * (cp.dH[ci] + cp.Z[ci]);
        }
    }
    cp.M.resize(n);
    for (std::size_t i = 0; i < n; ++i) cp.M[i] = h[i] + cp.Z[i];
    if (std::abs(cp.dH[0] + cp.Z[0] - 1.0) > 1e-9)
        throw validation_error("decompose: terminal expectation of H must be 1");

    cp.L.assign(n, 0.0);
    cp.K.assign(n, 0.0);
    cp.dK.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        // The root is handled as the child of a virtual parent with K = 0,
        // L = 1 and remaining mass M(root).
        double k_par, l_par, z_par;
        if (nd.parent < 0) {
            k_par = 0.0;
            l_par = 1.0;
            z_par = cp.dH[0] + cp.Z[0];
        } else {
            std::size_t p = static_cast<std::size_t>(nd.parent);
            k_par = cp.K[p];
            l_par = cp.L[p];
            z_par = cp.Z[p];
        }
        double zd = cp.Z[i] + cp.dH[i];
        cp.dK[i] = (zd > 0.0) ? (1.0 - k_par) * cp.dH[i] / zd : 0.0;
        cp.K[i] = k_par + cp.dK[i];
        cp.L[i] = (z_par > 0.0) ? l_par * zd / z_par : l_par;
    }
    return cp;
}

CanonicalPair decompose_measure(const EventTree& tree, const OptionalMeasure& q) {
    return decompose(tree, measure_to_H(tree, q).H);
}

double PairReport::max_violation() const {
    return std::max({root_l_error, negativity_error, martingale_drift,
                     k_monotone_error, k_range_error, lk_identity_error,
                     dh_identity_error, frozen_l_error, dk_at_dead_error,
                     leaf_exhaust_error, pathwise_error});
}

PairReport verify_pair(const EventTree& tree, const NodeProcess& h,
                       const CanonicalPair& cp) {
    check_node_process(tree, h);
    const std::size_t n = tree.size();
    if (cp.L.size() != n || cp.K.size() != n || cp.dK.size() != n)
        throw validation_error("verify_pair: pair size does not match tree");

    // Future-increment form of E[terminal H - current H]: exact zeros on
    // dead cells, unlike the cancellation-prone conditional expectation.
    NodeProcess fut(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        for (int c : nd.children) {
            std::size_t ci = static_cast<std::size_t>(c);
            double dhc = h[ci] - h[i];
            fut[i] += tree.node(c).trans_prob * (dhc + fut[ci]);
        }
    }
    PairReport rep;
    rep.root_l_error = std::abs(cp.L[0] - 1.0);

    for (std::size_t i = 0; i < n; ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        double h_par = nd.parent < 0 ? 0.0 : h[static_cast<std::size_t>(nd.parent)];
        double k_par = nd.parent < 0 ? 0.0 : cp.K[static_cast<std::size_t>(nd.parent)];
        double l_par = nd.parent < 0 ? 1.0 : cp.L[static_cast<std::size_t>(nd.parent)];
        double dh = h[i] - h_par;
        double z = fut[i];

        rep.negativity_error = std::max(rep.negativity_error, -cp.L[i]);
        rep.k_monotone_error = std::max(rep.k_monotone_error, -cp.dK[i]);
        rep.k_monotone_error =
            std::max(rep.k_monotone_error, std::abs(cp.K[i] - k_par - cp.dK[i]));
        rep.k_range_error =
            std::max({rep.k_range_error, -cp.K[i], cp.K[i] - 1.0});
        rep.lk_identity_error = std::max(
            rep.lk_identity_error, scaled_residual(cp.L[i] * (1.0 - cp.K[i]), z));
        rep.dh_identity_error =
            std::max(rep.dh_identity_error, scaled_residual(cp.L[i] * cp.dK[i], dh));
        if (nd.parent >= 0 && k_par >= 1.0 - 1e-12)
            rep.frozen_l_error =
                std::max(rep.frozen_l_error, scaled_residual(cp.L[i], l_par));
        if (cp.L[i] <= 1e-14)
            rep.dk_at_dead_error = std::max(rep.dk_at_dead_error, std::abs(cp.dK[i]));

        if (!nd.children.empty() && z > 0.0) {
            double e = 0.0;
            for (int c : nd.children)
                e += tree.node(c).trans_prob * cp.L[static_cast<std::size_t>(c)];
            rep.martingale_drift =
                std::max(rep.martingale_drift, scaled_residual(e, cp.L[i]));
        }
        if (nd.children.empty()) {
            rep.leaf_exhaust_error = std::max(
                rep.leaf_exhaust_error, std::abs(cp.L[i] * (1.0 - cp.K[i])));
        }
    }

    for (int leaf : tree.leaves()) {
        double s = 0.0;
        for (int v = leaf; v >= 0; v = tree.node(v).parent)
            s += cp.L[static_cast<std::size_t>(v)] * cp.dK[static_cast<std::size_t>(v)];
        rep.pathwise_error = std::max(
            rep.pathwise_error, scaled_residual(s, h[static_cast<std::size_t>(leaf)]));
    }
    return rep;
}

OptionalMeasure pair_to_measure(const EventTree& tree, const CanonicalPair& cp) {
    if (cp.L.size() != tree.size() || cp.dK.size() != tree.size())
        throw validation_error("pair_to_measure: pair size does not match tree");
    OptionalMeasure q(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i)
        q[i] = tree.node(static_cast<int>(i)).prob * cp.L[i] * cp.dK[i];
    return q;
}

std::vector<PerturbationRow> perturbation_convergence(
    const EventTree& tree, const NodeProcess& h,
    const std::vector<double>& eps_values) {
    CanonicalPair base = decompose(tree, h);
    const std::size_t n = tree.size();

    // Deterministic strictly increasing drift, completed to 1 at each leaf so
    // that total mass stays 1.
    NodeProcess g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        g[i] = nd.children.empty() ? 1.0
                                   : 1.0 - std::exp(-static_cast<double>(nd.time + 1));
    }

    std::vector<PerturbationRow> rows;
    for (double eps : eps_values) {
        if (!(eps > 0.0))
            throw validation_error("perturbation_convergence: eps must be positive");
        NodeProcess he(n);
        for (std::size_t i = 0; i < n; ++i)
            he[i] = (h[i] + eps * g[i]) / (1.0 + eps);
        CanonicalPair pert = decompose(tree, he);
        PerturbationRow row{eps, 0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const TreeNode& nd = tree.node(static_cast<int>(i));
            double z_par = nd.parent < 0
                               ? base.M[0]
                               : base.Z[static_cast<std::size_t>(nd.parent)];
            if (z_par <= 0.0) continue;  // originally dead cells may differ O(1)
            row.k_gap = std::max(row.k_gap, std::abs(pert.K[i] - base.K[i]));
            row.l_gap = std::max(row.l_gap, std::abs(pert.L[i] - base.L[i]));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace relrate
