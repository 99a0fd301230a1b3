#pragma once

#include <vector>

#include "bnc/bayesnet.hpp"
#include "bnc/factor.hpp"

namespace bnc {

/// Cluster tree over the network variables. Every family is covered by some
/// cluster, the running-intersection property holds, and each edge separator
/// equals the intersection of its endpoint clusters. After calibrate() each
/// node carries its marginal P(cluster).
struct Jointree {
    struct Edge {
        int a = -1;
        int b = -1;
        VarSet separator;
    };

    std::vector<VarSet> clusters;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> incident; // node -> edge indices
    std::vector<int> cpt_owner;             // net variable -> owning node
    std::vector<VarId> order;               // elimination order used to build
    std::vector<Factor> marginals;          // filled by calibrate()
    bool calibrated = false;

    size_t num_nodes() const { return clusters.size(); }
    int degree(int node) const { return static_cast<int>(incident[static_cast<size_t>(node)].size()); }
    int neighbor(int node, int edge) const {
        const Edge& e = edges[static_cast<size_t>(edge)];
        return e.a == node ? e.b : e.a;
    }
    int width() const;
};

struct WidthReport {
    int width = 0;
    std::vector<int> cluster_sizes;
    std::vector<VarId> order;
};

/// Greedy minimum-fill elimination order over the moral graph; ties broken by
/// lowest variable id.
std::vector<VarId> minfill_order(const BayesNet& net);

/// Cluster-sequence construction from an elimination order; keeps maximal
/// clusters only and connects disconnected components with empty separators.
Jointree build_jointree(const BayesNet& net, const std::vector<VarId>& order);

/// Throws StructuralError when any jointree invariant fails.
void validate_jointree(const Jointree& jt, const BayesNet& net);

WidthReport width_report(const Jointree& jt);

/// Makes the tree binary (every node has at most three neighbors) and gives
/// every feature a dedicated leaf {feature} + parents(feature), removing the
/// feature from all other clusters. Never increases the width. Marginals are
/// invalidated; calibrate afterwards.
Jointree normalize_shape(Jointree jt, const BayesNet& net, const VarSet& features);

/// Two-pass message passing; fills marginals with P(cluster) per node.
Jointree calibrate(Jointree jt, const BayesNet& net);

/// Joint marginal over an arbitrary variable set, computed from the calibrated
/// tree by multiplying the cluster marginals of a covering subtree and
/// dividing out its separators.
Factor query_marginal(const Jointree& jt, const VarSet& vars);

} // namespace bnc
