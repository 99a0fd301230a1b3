#include "bnc/ftree.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace bnc {

namespace {

// subtree feature sets and subtree widths, bottom-up
void fill_subtree_data(FTree& ft) {
    size_t n = ft.num_nodes();
    ft.feats_below.assign(n, {});
    std::vector<int> order; // parents before children
    order.push_back(ft.root);
    for (size_t i = 0; i < order.size(); ++i) {
        int q = order[i];
        if (ft.left[static_cast<size_t>(q)] >= 0) order.push_back(ft.left[static_cast<size_t>(q)]);
        if (ft.right[static_cast<size_t>(q)] >= 0) order.push_back(ft.right[static_cast<size_t>(q)]);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int q = *it;
        VarSet v = set_intersect(ft.cluster[static_cast<size_t>(q)], ft.features);
        if (ft.left[static_cast<size_t>(q)] >= 0)
            v = set_union(v, ft.feats_below[static_cast<size_t>(ft.left[static_cast<size_t>(q)])]);
        if (ft.right[static_cast<size_t>(q)] >= 0)
            v = set_union(v, ft.feats_below[static_cast<size_t>(ft.right[static_cast<size_t>(q)])]);
        ft.feats_below[static_cast<size_t>(q)] = std::move(v);
    }
}

int subtree_width(const FTree& ft, int q) {
    int w = static_cast<int>(ft.cluster[static_cast<size_t>(q)].size()) - 1;
    if (ft.left[static_cast<size_t>(q)] >= 0)
        w = std::max(w, subtree_width(ft, ft.left[static_cast<size_t>(q)]));
    if (ft.right[static_cast<size_t>(q)] >= 0)
        w = std::max(w, subtree_width(ft, ft.right[static_cast<size_t>(q)]));
    return w;
}

// Builds the oriented f-tree rooted at the given jointree node.
FTree build_candidate(const Jointree& jt, const ClassifierSpec& spec, int root_node) {
    const VarId y = spec.target;

    // terminal nodes: the (unique) holder of each feature plus the root
    std::vector<int> terminals{root_node};
    for (VarId f : spec.features) {
        int holder = -1;
        for (size_t c = 0; c < jt.num_nodes(); ++c)
            if (set_contains(jt.clusters[c], f)) {
                if (holder >= 0)
                    throw StructuralError("feature appears in several clusters; normalize first");
                holder = static_cast<int>(c);
            }
        if (holder < 0) throw StructuralError("feature missing from the jointree");
        terminals.push_back(holder);
    }

    // minimal covering subtree: union of tree paths to the root node
    std::vector<int> parent_edge(jt.num_nodes(), -2);
    std::queue<int> bfs;
    bfs.push(root_node);
    parent_edge[static_cast<size_t>(root_node)] = -1;
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        for (int e : jt.incident[static_cast<size_t>(u)]) {
            int w = jt.neighbor(u, e);
            if (parent_edge[static_cast<size_t>(w)] != -2) continue;
            parent_edge[static_cast<size_t>(w)] = e;
            bfs.push(w);
        }
    }
    std::set<int> keep;
    for (int t : terminals) {
        int u = t;
        while (!keep.count(u)) {
            keep.insert(u);
            int e = parent_edge[static_cast<size_t>(u)];
            if (e < 0) break;
            u = jt.neighbor(u, e);
        }
    }

    // local structure (jointree ids ascending for determinism)
    std::vector<int> jt_nodes(keep.begin(), keep.end());
    std::map<int, int> local;
    for (size_t i = 0; i < jt_nodes.size(); ++i) local[jt_nodes[i]] = static_cast<int>(i);

    FTree ft;
    ft.target = y;
    ft.features = spec.features;
    ft.jointree_width = jt.width();
    ft.root = local.at(root_node);
    size_t n = jt_nodes.size();
    ft.cluster.resize(n);
    ft.marginal.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        ft.cluster[i] = jt.clusters[static_cast<size_t>(jt_nodes[i])];
        ft.marginal.push_back(jt.marginals[static_cast<size_t>(jt_nodes[i])]);
    }
    ft.parent.assign(n, -1);
    std::vector<std::vector<int>> children(n);
    for (size_t i = 0; i < n; ++i) {
        int e = parent_edge[static_cast<size_t>(jt_nodes[i])];
        if (e < 0 || jt_nodes[i] == root_node) continue;
        int p = local.at(jt.neighbor(jt_nodes[i], e));
        ft.parent[i] = p;
        children[static_cast<size_t>(p)].push_back(static_cast<int>(i));
    }
    for (auto& c : children) std::sort(c.begin(), c.end());

    // the root must not keep features once it has children
    VarSet root_feats = set_intersect(ft.cluster[static_cast<size_t>(ft.root)], spec.features);
    if (!children[static_cast<size_t>(ft.root)].empty() && !root_feats.empty()) {
        int twin = static_cast<int>(ft.cluster.size());
        ft.cluster.push_back(ft.cluster[static_cast<size_t>(ft.root)]);
        ft.marginal.push_back(ft.marginal[static_cast<size_t>(ft.root)]);
        ft.parent.push_back(ft.root);
        children.push_back({});
        children[static_cast<size_t>(ft.root)].push_back(twin);
        ft.cluster[static_cast<size_t>(ft.root)] =
            set_difference(ft.cluster[static_cast<size_t>(ft.root)], root_feats);
        ft.marginal[static_cast<size_t>(ft.root)] =
            ft.marginal[static_cast<size_t>(ft.root)].project(
                ft.cluster[static_cast<size_t>(ft.root)]);
    }

    // the root of a rooted binary jointree may still own three children:
    // wrap the surplus into duplicate-cluster nodes
    while (children[static_cast<size_t>(ft.root)].size() > 2) {
        int c2 = *(children[static_cast<size_t>(ft.root)].end() - 2);
        int c3 = children[static_cast<size_t>(ft.root)].back();
        int twin = static_cast<int>(ft.cluster.size());
        ft.cluster.push_back(ft.cluster[static_cast<size_t>(ft.root)]);
        ft.marginal.push_back(ft.marginal[static_cast<size_t>(ft.root)]);
        ft.parent.push_back(ft.root);
        children.push_back({c2, c3}); // may reallocate: re-index below
        ft.parent[static_cast<size_t>(c2)] = twin;
        ft.parent[static_cast<size_t>(c3)] = twin;
        children[static_cast<size_t>(ft.root)].pop_back();
        children[static_cast<size_t>(ft.root)].pop_back();
        children[static_cast<size_t>(ft.root)].push_back(twin);
    }

    n = ft.cluster.size();
    ft.left.assign(n, -1);
    ft.right.assign(n, -1);
    for (size_t q = 0; q < n; ++q) {
        if (children[q].size() > 2)
            throw StructuralError("f-tree node with more than two children");
        if (children[q].size() == 1) {
            ft.right[q] = children[q][0];
        } else if (children[q].size() == 2) {
            // placeholder; oriented below once subtree data exists
            ft.left[q] = children[q][0];
            ft.right[q] = children[q][1];
        }
    }

    fill_subtree_data(ft);

    // orientation: the child that is cheaper to enumerate goes left
    for (size_t q = 0; q < n; ++q) {
        if (ft.left[q] < 0) continue;
        int a = ft.left[q], b = ft.right[q];
        long ka = static_cast<long>(ft.feats_below[static_cast<size_t>(a)].size()) +
                  subtree_width(ft, a);
        long kb = static_cast<long>(ft.feats_below[static_cast<size_t>(b)].size()) +
                  subtree_width(ft, b);
        if (kb < ka || (kb == ka && b < a)) std::swap(ft.left[q], ft.right[q]);
    }

    ft.sep_parent.assign(n, {});
    for (size_t q = 0; q < n; ++q) {
        if (ft.parent[q] < 0)
            ft.sep_parent[q] = {y};
        else
            ft.sep_parent[q] = set_intersect(ft.cluster[q],
                                             ft.cluster[static_cast<size_t>(ft.parent[q])]);
    }
    return ft;
}

} // namespace

FTree extract_ftree(const Jointree& jt, const ClassifierSpec& spec) {
    spec.validate();
    if (!jt.calibrated) throw StructuralError("extract_ftree needs a calibrated jointree");
    for (size_t c = 0; c < jt.num_nodes(); ++c)
        if (jt.degree(static_cast<int>(c)) > 3)
            throw StructuralError("extract_ftree needs a binary jointree; normalize first");

    std::vector<int> candidates;
    for (size_t c = 0; c < jt.num_nodes(); ++c)
        if (set_contains(jt.clusters[c], spec.target)) candidates.push_back(static_cast<int>(c));
    if (candidates.empty())
        throw StructuralError("no cluster contains the target variable");

    std::optional<FTree> best;
    long best_width = 0, best_size = 0;
    for (int c : candidates) {
        FTree ft = build_candidate(jt, spec, c);
        CompilationWidthReport report = compilation_width(ft);
        long width = report.omega_t;
        long size = static_cast<long>(ft.num_nodes());
        if (!best || width < best_width || (width == best_width && size < best_size)) {
            best = std::move(ft);
            best_width = width;
            best_size = size;
        }
    }
    return std::move(*best);
}

std::optional<std::pair<VarSet, VarSet>> split_partition(const FTree& ft, int child) {
    if (child < 0 || static_cast<size_t>(child) >= ft.num_nodes())
        throw StructuralError("split_partition: node out of range");
    if (ft.parent[static_cast<size_t>(child)] < 0)
        throw StructuralError("split_partition: the root has no parent edge");
    VarSet relevant = set_union(ft.features, VarSet{ft.target});
    if (!set_intersect(ft.sep_parent[static_cast<size_t>(child)], relevant).empty())
        return std::nullopt;
    VarSet v = ft.feats_below[static_cast<size_t>(child)];
    return std::make_pair(set_difference(ft.features, v), v);
}

CompilationWidthReport compilation_width(const FTree& ft) {
    CompilationWidthReport r;
    r.omega = ft.jointree_width;

    for (int q = ft.root; q >= 0; q = ft.right[static_cast<size_t>(q)]) {
        r.rightmost.push_back(q);
        if (ft.left[static_cast<size_t>(q)] >= 0)
            r.left_children.push_back(ft.left[static_cast<size_t>(q)]);
    }
    for (int q : r.rightmost) {
        int cost = static_cast<int>(ft.feats_outside(q).size() +
                                    ft.cluster[static_cast<size_t>(q)].size());
        r.omega_r = std::max(r.omega_r, cost);
    }
    for (int q : r.left_children) {
        int cost = static_cast<int>(ft.feats_below[static_cast<size_t>(q)].size()) +
                   subtree_width(ft, q);
        r.omega_l = std::max(r.omega_l, cost);
    }
    r.omega_t = std::max(r.omega, std::max(r.omega_r, r.omega_l));
    if (r.omega_t > r.omega + static_cast<int>(ft.features.size()))
        throw StructuralError("compilation width exceeds omega + |X|");
    return r;
}

} // namespace bnc
