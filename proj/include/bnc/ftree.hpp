#pragma once

#include <optional>
#include <vector>

#include "bnc/bayesnet.hpp"
#include "bnc/jointree.hpp"

namespace bnc {

/// Compilation scaffold: a connected subtree of a jointree covering the
/// features and the target, rooted at a cluster containing the target.
/// Features appear only in leaf clusters; every node has at most two
/// children (the only child of a single-child node is the right one).
struct FTree {
    VarId target = -1;
    VarSet features;

    int root = -1;
    std::vector<VarSet> cluster;
    std::vector<Factor> marginal;    // calibrated P(cluster) per node
    std::vector<int> parent;         // -1 at the root
    std::vector<int> left;           // -1 when absent
    std::vector<int> right;          // -1 at leaves
    std::vector<VarSet> sep_parent;  // separator with the parent; {target} at the root
    std::vector<VarSet> feats_below; // V_q: features in the subtree of q

    int jointree_width = 0; // omega of the source jointree

    size_t num_nodes() const { return cluster.size(); }
    bool is_leaf(int q) const { return right[static_cast<size_t>(q)] < 0; }

    /// U_q = X \ V_q.
    VarSet feats_outside(int q) const { return set_difference(features, feats_below[static_cast<size_t>(q)]); }
};

struct CompilationWidthReport {
    int omega = 0;   // jointree width
    int omega_r = 0; // max over rightmost-path nodes of |U_q| + |C_q|
    int omega_l = 0; // max over left children of |V_q| + ftw(q)
    int omega_t = 0; // max of the three
    std::vector<int> rightmost;     // R
    std::vector<int> left_children; // L
};

/// Builds the minimal f-tree for the classifier from a normalized, calibrated
/// jointree. The root is chosen among target-containing nodes to minimize the
/// compilation width (ties: fewer nodes, then lower node id); children are
/// oriented so the cheaper-to-enumerate child is the left one.
FTree extract_ftree(const Jointree& jt, const ClassifierSpec& spec);

/// Feature split across the edge between `child` and its parent. Returns
/// (U, V) when the separator avoids the features and the target, U being the
/// features on the target's side; nullopt otherwise.
std::optional<std::pair<VarSet, VarSet>> split_partition(const FTree& ft, int child);

/// Width formulas for the fixed orientation; throws when the always-valid
/// bound omega_t <= omega + |X| fails.
CompilationWidthReport compilation_width(const FTree& ft);

} // namespace bnc
