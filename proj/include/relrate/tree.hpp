#pragma once

#include <cstddef>
#include <vector>

namespace relrate {

struct TreeNode {
    int id = 0;
    int parent = -1;
    int time = 0;
    double trans_prob = 1.0;  // branch probability given the parent; 1 at the root
    double prob = 1.0;        // unconditional probability of passing through
    std::vector<int> children;
};

// A finite event tree carrying its filtration: nodes at time t are the atoms
// of the time-t information, leaves are the atoms of terminal information.
// Transition probabilities are strictly positive, so no branch is null.
class EventTree {
  public:
    // parent[0] == -1 for the root; parent[i] < i otherwise. trans_prob[i] is
    // the branch probability of node i given its parent; siblings must sum
    // to one and the root entry must be 1.
    static EventTree from_parents(std::vector<int> parent,
                                  std::vector<double> trans_prob);

    // Uniform tree with the given depth and branching factor; child_probs
    // (one entry per child slot, summing to one) defaults to uniform.
    static EventTree regular(int depth, int branching,
                             std::vector<double> child_probs = {});

    std::size_t size() const { return nodes_.size(); }
    const TreeNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int horizon() const { return horizon_; }
    const std::vector<int>& leaves() const { return leaves_; }
    bool is_leaf(int i) const { return nodes_[static_cast<std::size_t>(i)].children.empty(); }

    // The node on the path of `descendant` at the given time.
    int ancestor_at(int descendant, int time) const;

  private:
    std::vector<TreeNode> nodes_;
    std::vector<int> leaves_;
    int horizon_ = 0;
};

// One value per node: an adapted process (value at a node = value of the
// process at that node's time on that path).
using NodeProcess = std::vector<double>;

// A random time: for each leaf, the sampling time along that leaf's path.
// Values lie in [0, leaf time]. Arbitrary maps are allowed; stopping times
// are the special case checked by is_stopping_time.
using RandomTime = std::vector<int>;

void check_node_process(const EventTree& tree, const NodeProcess& x);
void check_random_time(const EventTree& tree, const RandomTime& T);

// E[X_terminal | node] for every node; X is read at the leaves only.
NodeProcess conditional_expectation(const EventTree& tree, const NodeProcess& x);

enum class MartingaleKind { martingale, supermartingale, submartingale, neither };

struct MartingaleReport {
    MartingaleKind kind;
    double max_upward_drift;    // max over nodes of (E[X_next | node] - X(node))
    double max_downward_drift;  // max over nodes of the negative part
};

MartingaleReport martingale_class(const EventTree& tree, const NodeProcess& x,
                                  double tol = 1e-10);

bool is_stopping_time(const EventTree& tree, const RandomTime& T);

// Sampling measure of a random time, node by node:
//   dH(node) = P[T = time(node), path passes node] / P[node],
// together with its running sums H along each path. For every random time
// the increments carry total mass E[H_terminal] = 1.
struct DualProjection {
    NodeProcess dH;
    NodeProcess H;
};

DualProjection dual_optional_projection(const EventTree& tree, const RandomTime& T);

// E[V_T] by exact leaf enumeration.
double expectation_at(const EventTree& tree, const NodeProcess& v, const RandomTime& T);

// E[sum_t V_t dH_t] = sum over nodes of P[node] V(node) dH(node).
double optional_sum(const EventTree& tree, const NodeProcess& v, const NodeProcess& dH);

}  // namespace relrate
