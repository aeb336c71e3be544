#include "relrate/tree.hpp"

#include <algorithm>
#include <cmath>

#include "relrate/errors.hpp"

namespace relrate {

namespace {
constexpr std::size_t kNodeCap = 1000000;
}

EventTree EventTree::from_parents(std::vector<int> parent,
                                  std::vector<double> trans_prob) {
    const std::size_t n = parent.size();
    if (n == 0) throw validation_error("EventTree: empty node list");
    if (n > kNodeCap) throw validation_error("EventTree: node cap exceeded");
    if (trans_prob.size() != n)
        throw validation_error("EventTree: probability list size mismatch");
    if (parent[0] != -1)
        throw validation_error("EventTree: node 0 must be the root");

    EventTree t;
    t.nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        TreeNode& nd = t.nodes_[i];
        nd.id = static_cast<int>(i);
        nd.parent = parent[i];
        nd.trans_prob = trans_prob[i];
        if (!std::isfinite(nd.trans_prob) || nd.trans_prob <= 0.0 ||
            nd.trans_prob > 1.0)
            throw validation_error("EventTree: branch probabilities must lie in (0,1]");
        if (i == 0) {
            if (std::abs(nd.trans_prob - 1.0) > 1e-12)
                throw validation_error("EventTree: root probability must be 1");
            nd.time = 0;
            nd.prob = 1.0;
            continue;
        }
        if (nd.parent < 0 || nd.parent >= static_cast<int>(i))
            throw validation_error("EventTree: parents must precede children");
        TreeNode& par = t.nodes_[static_cast<std::size_t>(nd.parent)];
        nd.time = par.time + 1;
        nd.prob = par.prob * nd.trans_prob;
        par.children.push_back(nd.id);
        t.horizon_ = std::max(t.horizon_, nd.time);
    }
    for (const TreeNode& nd : t.nodes_) {
        if (nd.children.empty()) {
            t.leaves_.push_back(nd.id);
            continue;
        }
        double s = 0.0;
        for (int c : nd.children) s += t.nodes_[static_cast<std::size_t>(c)].trans_prob;
        if (std::abs(s - 1.0) > 1e-12)
            throw validation_error("EventTree: sibling probabilities must sum to 1");
    }
    return t;
}

EventTree EventTree::regular(int depth, int branching,
                             std::vector<double> child_probs) {
    if (depth < 0 || branching < 1)
        throw validation_error("EventTree: bad regular tree shape");
    if (child_probs.empty())
        child_probs.assign(static_cast<std::size_t>(branching),
                           1.0 / static_cast<double>(branching));
    if (child_probs.size() != static_cast<std::size_t>(branching))
        throw validation_error("EventTree: child probability count mismatch");

    std::size_t count = 1, level = 1;
    for (int d = 0; d < depth; ++d) {
        level *= static_cast<std::size_t>(branching);
        count += level;
        if (count > kNodeCap) throw validation_error("EventTree: node cap exceeded");
    }
    std::vector<int> parent;
    std::vector<double> tp;
    parent.reserve(count);
    tp.reserve(count);
    parent.push_back(-1);
    tp.push_back(1.0);
    std::size_t first_of_level = 0, level_size = 1;
    for (int d = 0; d < depth; ++d) {
        for (std::size_t i = 0; i < level_size; ++i) {
            int p = static_cast<int>(first_of_level + i);
            for (int b = 0; b < branching; ++b) {
                parent.push_back(p);
                tp.push_back(child_probs[static_cast<std::size_t>(b)]);
            }
        }
        first_of_level += level_size;
        level_size *= static_cast<std::size_t>(branching);
    }
    return from_parents(std::move(parent), std::move(tp));
}

int EventTree::ancestor_at(int descendant, int time) const {
    int v = descendant;
    const TreeNode* nd = &node(v);
    if (time < 0 || time > nd->time)
        throw validation_error("ancestor_at: time outside the node's path");
    while (nd->time > time) {
        v = nd->parent;
        nd = &node(v);
    }
    return v;
}

void check_node_process(const EventTree& tree, const NodeProcess& x) {
    if (x.size() != tree.size())
        throw validation_error("node process: size does not match tree");
    for (double v : x)
        if (!std::isfinite(v))
            throw validation_error("node process: values must be finite");
}

void check_random_time(const EventTree& tree, const RandomTime& T) {
    if (T.size() != tree.leaves().size())
        throw validation_error("random time: one entry per leaf required");
    for (std::size_t i = 0; i < T.size(); ++i) {
        int leaf = tree.leaves()[i];
        if (T[i] < 0 || T[i] > tree.node(leaf).time)
            throw validation_error("random time: value outside the leaf's path");
    }
}

NodeProcess conditional_expectation(const EventTree& tree, const NodeProcess& x) {
    check_node_process(tree, x);
    NodeProcess m(tree.size(), 0.0);
    for (std::size_t i = tree.size(); i-- > 0;) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        if (nd.children.empty()) {
            m[i] = x[i];
        } else {
            double s = 0.0;
            for (int c : nd.children)
                s += tree.node(c).trans_prob * m[static_cast<std::size_t>(c)];
            m[i] = s;
        }
    }
    return m;
}

MartingaleReport martingale_class(const EventTree& tree, const NodeProcess& x,
                                  double tol) {
    check_node_process(tree, x);
    double up = 0.0, down = 0.0;
    for (const TreeNode& nd : tree.nodes()) {
        if (nd.children.empty()) continue;
        double e = 0.0;
        for (int c : nd.children)
            e += tree.node(c).trans_prob * x[static_cast<std::size_t>(c)];
        double drift = e - x[static_cast<std::size_t>(nd.id)];
        up = std::max(up, drift);
        down = std::max(down, -drift);
    }
    MartingaleKind kind;
    if (up <= tol && down <= tol) kind = MartingaleKind::martingale;
    else if (up <= tol) kind = MartingaleKind::supermartingale;
    else if (down <= tol) kind = MartingaleKind::submartingale;
    else kind = MartingaleKind::neither;
    return {kind, up, down};
}

bool is_stopping_time(const EventTree& tree, const RandomTime& T) {
    check_random_time(tree, T);
    // T is a stopping time iff whenever a leaf samples at time s, every leaf
    // sharing its time-s node samples at s as well. Aggregate min/max of T
    // over the leaves below each node, then test at the sampled ancestors.
    std::vector<int> tmin(tree.size(), tree.horizon() + 1);
    std::vector<int> tmax(tree.size(), -1);
    for (std::size_t i = 0; i < T.size(); ++i) {
        std::size_t leaf = static_cast<std::size_t>(tree.leaves()[i]);
        tmin[leaf] = tmax[leaf] = T[i];
    }
    for (std::size_t i = tree.size(); i-- > 1;) {
        std::size_t p = static_cast<std::size_t>(tree.node(static_cast<int>(i)).parent);
        tmin[p] = std::min(tmin[p], tmin[i]);
        tmax[p] = std::max(tmax[p], tmax[i]);
    }
    for (std::size_t i = 0; i < T.size(); ++i) {
        int a = tree.ancestor_at(tree.leaves()[i], T[i]);
        std::size_t ai = static_cast<std::size_t>(a);
        if (tmin[ai] != T[i] || tmax[ai] != T[i]) return false;
    }
    return true;
}

DualProjection dual_optional_projection(const EventTree& tree, const RandomTime& T) {
    check_random_time(tree, T);
    NodeProcess num(tree.size(), 0.0);
    for (std::size_t i = 0; i < T.size(); ++i) {
        int leaf = tree.leaves()[i];
        int a = tree.ancestor_at(leaf, T[i]);
        num[static_cast<std::size_t>(a)] += tree.node(leaf).prob;
    }
    DualProjection dp;
    dp.dH.resize(tree.size());
    dp.H.resize(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeNode& nd = tree.node(static_cast<int>(i));
        dp.dH[i] = num[i] / nd.prob;
        dp.H[i] = (nd.parent < 0 ? 0.0 : dp.H[static_cast<std::size_t>(nd.parent)]) +
                  dp.dH[i];
    }
    return dp;
}

double expectation_at(const EventTree& tree, const NodeProcess& v,
                      const RandomTime& T) {
    check_node_process(tree, v);
    check_random_time(tree, T);
    double s = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i) {
        int leaf = tree.leaves()[i];
        int a = tree.ancestor_at(leaf, T[i]);
        s += tree.node(leaf).prob * v[static_cast<std::size_t>(a)];
    }
    return s;
}

double optional_sum(const EventTree& tree, const NodeProcess& v,
                    const NodeProcess& dH) {
    check_node_process(tree, v);
    check_node_process(tree, dH);
    double s = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i)
        s += tree.node(static_cast<int>(i)).prob * v[i] * dH[i];
    return s;
}

}  // namespace relrate
