#include "bnc/jointree.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace bnc {

int Jointree::width() const {
    int w = 0;
    for (const VarSet& c : clusters) w = std::max(w, static_cast<int>(c.size()) - 1);
    return w;
}

std::vector<VarId> minfill_order(const BayesNet& net) {
    const size_t n = net.num_vars();
    std::vector<std::set<VarId>> adj(n);
    for (size_t v = 0; v < n; ++v) {
        VarSet fam = net.family(static_cast<VarId>(v));
        for (VarId a : fam)
            for (VarId b : fam)
                if (a != b) adj[static_cast<size_t>(a)].insert(b);
    }

    std::vector<VarId> order;
    std::set<VarId> remaining;
    for (size_t v = 0; v < n; ++v) remaining.insert(static_cast<VarId>(v));

    while (!remaining.empty()) {
        VarId best = -1;
        long best_fill = -1;
        for (VarId v : remaining) {
            const auto& nbrs = adj[static_cast<size_t>(v)];
            long fill = 0;
            for (auto it = nbrs.begin(); it != nbrs.end(); ++it)
                for (auto jt = std::next(it); jt != nbrs.end(); ++jt)
                    if (!adj[static_cast<size_t>(*it)].count(*jt)) ++fill;
            if (best == -1 || fill < best_fill) {
                best = v;
                best_fill = fill;
            }
        }
        order.push_back(best);
        remaining.erase(best);
        auto nbrs = adj[static_cast<size_t>(best)];
        for (VarId a : nbrs) {
            adj[static_cast<size_t>(a)].erase(best);
            for (VarId b : nbrs)
                if (a != b) adj[static_cast<size_t>(a)].insert(b);
        }
        adj[static_cast<size_t>(best)].clear();
    }
    return order;
}

Jointree build_jointree(const BayesNet& net, const std::vector<VarId>& order) {
    const size_t n = net.num_vars();
    if (order.size() != n) throw StructuralError("elimination order must cover every variable");
    {
        std::set<VarId> uniq(order.begin(), order.end());
        if (uniq.size() != n) throw StructuralError("elimination order has duplicates");
    }

    // elimination clusters over the moral graph
    std::vector<std::set<VarId>> adj(n);
    for (size_t v = 0; v < n; ++v) {
        VarSet fam = net.family(static_cast<VarId>(v));
        for (VarId a : fam)
            for (VarId b : fam)
                if (a != b) adj[static_cast<size_t>(a)].insert(b);
    }
    std::vector<VarSet> clusters(n);
    std::vector<int> step_of(n, -1);
    for (size_t i = 0; i < n; ++i) {
        VarId v = order[i];
        step_of[static_cast<size_t>(v)] = static_cast<int>(i);
        std::vector<VarId> c(adj[static_cast<size_t>(v)].begin(), adj[static_cast<size_t>(v)].end());
        c.push_back(v);
        clusters[i] = make_sorted(std::move(c));
        auto nbrs = adj[static_cast<size_t>(v)];
        for (VarId a : nbrs) {
            adj[static_cast<size_t>(a)].erase(v);
            for (VarId b : nbrs)
                if (a != b) adj[static_cast<size_t>(a)].insert(b);
        }
        adj[static_cast<size_t>(v)].clear();
    }

    // attach each cluster below the cluster of its first-eliminated remainder
    std::vector<int> parent(n, -1);
    for (size_t i = 0; i < n; ++i) {
        int first = -1;
        for (VarId v : clusters[i]) {
            if (v == order[i]) continue;
            int s = step_of[static_cast<size_t>(v)];
            if (s > static_cast<int>(i) && (first == -1 || s < first)) first = s;
        }
        parent[i] = first;
    }

    // absorb non-maximal clusters into their tree neighbors
    std::vector<int> repr(n);
    for (size_t i = 0; i < n; ++i) repr[i] = static_cast<int>(i);
    auto find = [&](int x) {
        while (repr[static_cast<size_t>(x)] != x) {
            repr[static_cast<size_t>(x)] = repr[static_cast<size_t>(repr[static_cast<size_t>(x)])];
            x = repr[static_cast<size_t>(x)];
        }
        return x;
    };
    std::vector<std::set<int>> nbr(n);
    for (size_t i = 0; i < n; ++i)
        if (parent[i] >= 0) {
            nbr[i].insert(parent[i]);
            nbr[static_cast<size_t>(parent[i])].insert(static_cast<int>(i));
        }
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < n && !changed; ++i) {
            int a = find(static_cast<int>(i));
            if (a != static_cast<int>(i)) continue;
            for (int bn : nbr[i]) {
                int b = find(bn);
                if (a == b) continue;
                const VarSet& ca = clusters[static_cast<size_t>(a)];
                const VarSet& cb = clusters[static_cast<size_t>(b)];
                int absorbed = -1, keeper = -1;
                if (is_subset(ca, cb)) {
                    absorbed = a;
                    keeper = b;
                } else if (is_subset(cb, ca)) {
                    absorbed = b;
                    keeper = a;
                }
                if (absorbed < 0) continue;
                repr[static_cast<size_t>(absorbed)] = keeper;
                for (int x : nbr[static_cast<size_t>(absorbed)])
                    if (find(x) != keeper) nbr[static_cast<size_t>(keeper)].insert(x);
                nbr[static_cast<size_t>(absorbed)].clear();
                changed = true;
                break;
            }
        }
    }

    // compact representatives into the final node list
    std::map<int, int> node_of;
    Jointree jt;
    for (size_t i = 0; i < n; ++i) {
        if (find(static_cast<int>(i)) != static_cast<int>(i)) continue;
        node_of[static_cast<int>(i)] = static_cast<int>(jt.clusters.size());
        jt.clusters.push_back(clusters[i]);
    }
    std::set<std::pair<int, int>> edge_seen;
    for (size_t i = 0; i < n; ++i) {
        if (find(static_cast<int>(i)) != static_cast<int>(i)) continue;
        for (int x : nbr[i]) {
            int j = find(x);
            if (j == static_cast<int>(i)) continue;
            int a = node_of[static_cast<int>(i)], b = node_of[j];
            auto key = std::minmax(a, b);
            if (edge_seen.count({key.first, key.second})) continue;
            edge_seen.insert({key.first, key.second});
            jt.edges.push_back({key.first, key.second,
                                set_intersect(jt.clusters[static_cast<size_t>(a)],
                                              jt.clusters[static_cast<size_t>(b)])});
        }
    }

    // connect remaining components with empty separators
    {
        size_t m = jt.clusters.size();
        std::vector<int> comp(m, -1);
        std::vector<std::vector<int>> adj2(m);
        for (const auto& e : jt.edges) {
            adj2[static_cast<size_t>(e.a)].push_back(e.b);
            adj2[static_cast<size_t>(e.b)].push_back(e.a);
        }
        int nc = 0;
        for (size_t i = 0; i < m; ++i) {
            if (comp[i] >= 0) continue;
            std::queue<int> q;
            q.push(static_cast<int>(i));
            comp[i] = nc;
            while (!q.empty()) {
                int u = q.front();
                q.pop();
                for (int w : adj2[static_cast<size_t>(u)])
                    if (comp[static_cast<size_t>(w)] < 0) {
                        comp[static_cast<size_t>(w)] = nc;
                        q.push(w);
                    }
            }
            ++nc;
        }
        std::vector<int> first_of(static_cast<size_t>(nc), -1);
        for (size_t i = 0; i < m; ++i)
            if (first_of[static_cast<size_t>(comp[i])] < 0)
                first_of[static_cast<size_t>(comp[i])] = static_cast<int>(i);
        for (int c = 1; c < nc; ++c)
            jt.edges.push_back({first_of[0], first_of[static_cast<size_t>(c)],
                                set_intersect(jt.clusters[static_cast<size_t>(first_of[0])],
                                              jt.clusters[static_cast<size_t>(first_of[static_cast<size_t>(c)])])});
    }

    jt.incident.assign(jt.clusters.size(), {});
    for (size_t e = 0; e < jt.edges.size(); ++e) {
        jt.incident[static_cast<size_t>(jt.edges[e].a)].push_back(static_cast<int>(e));
        jt.incident[static_cast<size_t>(jt.edges[e].b)].push_back(static_cast<int>(e));
    }

    // assign each CPT to the lowest node covering its family
    jt.cpt_owner.assign(net.num_vars(), -1);
    for (size_t v = 0; v < net.num_vars(); ++v) {
        VarSet fam = net.family(static_cast<VarId>(v));
        for (size_t c = 0; c < jt.clusters.size(); ++c)
            if (is_subset(fam, jt.clusters[c])) {
                jt.cpt_owner[v] = static_cast<int>(c);
                break;
            }
        if (jt.cpt_owner[v] < 0)
            throw StructuralError("no cluster covers the family of variable " + std::to_string(v));
    }
    jt.order = order;
    return jt;
}

void validate_jointree(const Jointree& jt, const BayesNet& net) {
    const size_t m = jt.num_nodes();
    if (m == 0) throw StructuralError("jointree has no nodes");
    if (jt.edges.size() != m - 1) throw StructuralError("jointree is not a tree (edge count)");

    std::vector<std::vector<int>> adj(m);
    for (const auto& e : jt.edges) {
        if (e.a < 0 || e.b < 0 || static_cast<size_t>(e.a) >= m || static_cast<size_t>(e.b) >= m)
            throw StructuralError("jointree edge endpoint out of range");
        adj[static_cast<size_t>(e.a)].push_back(e.b);
        adj[static_cast<size_t>(e.b)].push_back(e.a);
        VarSet expect = set_intersect(jt.clusters[static_cast<size_t>(e.a)],
                                      jt.clusters[static_cast<size_t>(e.b)]);
        if (e.separator != expect)
            throw StructuralError("separator is not the intersection of its endpoints");
    }
    std::vector<bool> seen(m, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    size_t count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int w : adj[static_cast<size_t>(u)])
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = true;
                ++count;
                q.push(w);
            }
    }
    if (count != m) throw StructuralError("jointree is not connected");

    for (size_t v = 0; v < net.num_vars(); ++v) {
        VarSet fam = net.family(static_cast<VarId>(v));
        bool covered = false;
        for (const VarSet& c : jt.clusters)
            if (is_subset(fam, c)) covered = true;
        if (!covered)
            throw StructuralError("family of variable " + std::to_string(v) + " is not covered");
    }

    // running intersection: the nodes containing each variable form a subtree
    for (size_t v = 0; v < net.num_vars(); ++v) {
        VarId var = static_cast<VarId>(v);
        std::vector<int> holders;
        for (size_t c = 0; c < m; ++c)
            if (set_contains(jt.clusters[c], var)) holders.push_back(static_cast<int>(c));
        if (holders.empty())
            throw StructuralError("variable " + std::to_string(v) + " appears in no cluster");
        std::set<int> holder_set(holders.begin(), holders.end());
        std::set<int> reached;
        std::queue<int> qq;
        qq.push(holders[0]);
        reached.insert(holders[0]);
        while (!qq.empty()) {
            int u = qq.front();
            qq.pop();
            for (int e : jt.incident[static_cast<size_t>(u)]) {
                int w = jt.neighbor(u, e);
                if (!holder_set.count(w) || reached.count(w)) continue;
                if (!set_contains(jt.edges[static_cast<size_t>(e)].separator, var)) continue;
                reached.insert(w);
                qq.push(w);
            }
        }
        if (reached.size() != holders.size())
            throw StructuralError("running intersection fails for variable " + std::to_string(v));
    }

    if (jt.cpt_owner.size() != net.num_vars())
        throw StructuralError("cpt_owner table has the wrong size");
    for (size_t v = 0; v < net.num_vars(); ++v) {
        int owner = jt.cpt_owner[v];
        if (owner < 0 || static_cast<size_t>(owner) >= m)
            throw StructuralError("cpt owner out of range");
        if (!is_subset(net.family(static_cast<VarId>(v)), jt.clusters[static_cast<size_t>(owner)]))
            throw StructuralError("cpt owner does not cover the family");
    }
}

WidthReport width_report(const Jointree& jt) {
    WidthReport r;
    for (const VarSet& c : jt.clusters) r.cluster_sizes.push_back(static_cast<int>(c.size()));
    r.width = jt.width();
    r.order = jt.order;
    return r;
}

namespace {

void add_edge(Jointree& jt, int a, int b) {
    jt.edges.push_back({a, b,
                        set_intersect(jt.clusters[static_cast<size_t>(a)],
                                      jt.clusters[static_cast<size_t>(b)])});
    jt.incident[static_cast<size_t>(a)].push_back(static_cast<int>(jt.edges.size()) - 1);
    jt.incident[static_cast<size_t>(b)].push_back(static_cast<int>(jt.edges.size()) - 1);
}

void refresh_separators(Jointree& jt) {
    for (auto& e : jt.edges)
        e.separator = set_intersect(jt.clusters[static_cast<size_t>(e.a)],
                                    jt.clusters[static_cast<size_t>(e.b)]);
}

} // namespace

Jointree normalize_shape(Jointree jt, const BayesNet& net, const VarSet& features) {
    jt.marginals.clear();
    jt.calibrated = false;

    // Dedicated leaf per feature: iterate to a fixpoint because attaching a
    // leaf raises the host's degree and can unsettle a feature kept there.
    std::set<int> created_leaves;
    bool changed = true;
    while (changed) {
        changed = false;
        for (VarId f : features) {
            std::vector<int> occ;
            for (size_t c = 0; c < jt.num_nodes(); ++c)
                if (set_contains(jt.clusters[c], f)) occ.push_back(static_cast<int>(c));
            if (occ.size() == 1 && jt.degree(occ[0]) <= 1) continue;

            VarSet parents = make_sorted(net.parents(f));
            for (int c : occ)
                jt.clusters[static_cast<size_t>(c)] =
                    set_difference(jt.clusters[static_cast<size_t>(c)], VarSet{f});
            // host: lowest original node covering the parents, preferring
            // clusters free of features
            int host = -1, fallback = -1;
            for (size_t c = 0; c < jt.num_nodes(); ++c) {
                if (created_leaves.count(static_cast<int>(c))) continue;
                if (!is_subset(parents, jt.clusters[c])) continue;
                if (fallback < 0) fallback = static_cast<int>(c);
                if (set_intersect(jt.clusters[c], features).empty()) {
                    host = static_cast<int>(c);
                    break;
                }
            }
            if (host < 0) host = fallback;
            if (host < 0) throw StructuralError("no host cluster for relocated feature");

            jt.clusters.push_back(set_union(VarSet{f}, parents));
            jt.incident.emplace_back();
            int leaf = static_cast<int>(jt.clusters.size()) - 1;
            created_leaves.insert(leaf);
            refresh_separators(jt);
            add_edge(jt, host, leaf);
            jt.cpt_owner[static_cast<size_t>(f)] = leaf;
            // reassign any CPT whose owner no longer covers it (f was removed)
            for (size_t v = 0; v < net.num_vars(); ++v) {
                int owner = jt.cpt_owner[v];
                if (!is_subset(net.family(static_cast<VarId>(v)),
                               jt.clusters[static_cast<size_t>(owner)])) {
                    jt.cpt_owner[v] = -1;
                    for (size_t c = 0; c < jt.num_nodes(); ++c)
                        if (is_subset(net.family(static_cast<VarId>(v)), jt.clusters[c])) {
                            jt.cpt_owner[v] = static_cast<int>(c);
                            break;
                        }
                    if (jt.cpt_owner[v] < 0)
                        throw StructuralError("feature relocation broke family coverage");
                }
            }
            changed = true;
        }
    }

    // binarize: split the highest-degree node until every degree is <= 3
    for (;;) {
        int worst = -1;
        for (size_t c = 0; c < jt.num_nodes(); ++c)
            if (jt.degree(static_cast<int>(c)) > 3 &&
                (worst < 0 || jt.degree(static_cast<int>(c)) > jt.degree(worst)))
                worst = static_cast<int>(c);
        if (worst < 0) break;

        std::vector<int> inc = jt.incident[static_cast<size_t>(worst)];
        std::sort(inc.begin(), inc.end());
        jt.clusters.push_back(jt.clusters[static_cast<size_t>(worst)]);
        jt.incident.emplace_back();
        int twin = static_cast<int>(jt.clusters.size()) - 1;

        // keep the two lowest edges on the original, move the rest to the twin
        for (size_t i = 2; i < inc.size(); ++i) {
            auto& e = jt.edges[static_cast<size_t>(inc[i])];
            (e.a == worst ? e.a : e.b) = twin;
            auto& old_inc = jt.incident[static_cast<size_t>(worst)];
            old_inc.erase(std::find(old_inc.begin(), old_inc.end(), inc[i]));
            jt.incident[static_cast<size_t>(twin)].push_back(inc[i]);
        }
        add_edge(jt, worst, twin);
    }
    refresh_separators(jt);
    return jt;
}

Jointree calibrate(Jointree jt, const BayesNet& net) {
    const size_t m = jt.num_nodes();
    std::vector<Factor> potential(m, Factor(1.0));
    for (size_t v = 0; v < net.num_vars(); ++v) {
        int owner = jt.cpt_owner[v];
        potential[static_cast<size_t>(owner)] =
            potential[static_cast<size_t>(owner)].multiply(net.cpt(static_cast<VarId>(v)));
    }

    // Shafer-Shenoy messages over each directed edge, collect then distribute
    std::vector<std::optional<Factor>> msg(jt.edges.size() * 2); // 2e, 2e+1: a->b, b->a
    auto msg_index = [&](int e, int from) {
        return static_cast<size_t>(e) * 2 + (jt.edges[static_cast<size_t>(e)].a == from ? 0 : 1);
    };

    // iterative post-order from node 0
    std::vector<std::pair<int, int>> stack{{0, -1}}; // node, parent edge
    std::vector<std::pair<int, int>> postorder;
    while (!stack.empty()) {
        auto [u, pe] = stack.back();
        stack.pop_back();
        postorder.emplace_back(u, pe);
        for (int e : jt.incident[static_cast<size_t>(u)])
            if (e != pe) stack.emplace_back(jt.neighbor(u, e), e);
    }

    auto send = [&](int from, int e) {
        Factor prod = potential[static_cast<size_t>(from)];
        for (int other : jt.incident[static_cast<size_t>(from)]) {
            if (other == e) continue;
            prod = prod.multiply(*msg[msg_index(other, jt.neighbor(from, other))]);
        }
        VarSet keep = set_intersect(prod.scope(), jt.edges[static_cast<size_t>(e)].separator);
        msg[msg_index(e, from)] = prod.project(keep);
    };

    for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
        auto [u, pe] = *it;
        if (pe >= 0) send(u, pe);
    }
    for (auto [u, pe] : postorder) {
        (void)u;
        if (pe >= 0) {
            int parent = jt.neighbor(u, pe);
            send(parent, pe);
        }
    }

    jt.marginals.clear();
    jt.marginals.reserve(m);
    for (size_t c = 0; c < m; ++c) {
        Factor phi = potential[c];
        for (int e : jt.incident[c])
            phi = phi.multiply(*msg[msg_index(e, jt.neighbor(static_cast<int>(c), e))]);
        // pad variables that appear in no potential on this side (uniform-free)
        for (VarId v : jt.clusters[c])
            if (!set_contains(phi.scope(), v)) {
                std::vector<double> ones(static_cast<size_t>(net.card(v)), 1.0);
                phi = phi.multiply(Factor({v}, {net.card(v)}, std::move(ones)));
            }
        jt.marginals.push_back(phi.project(jt.clusters[c]));
    }
    jt.calibrated = true;
    return jt;
}

Factor query_marginal(const Jointree& jt, const VarSet& vars) {
    if (!jt.calibrated) throw StructuralError("query_marginal needs a calibrated jointree");
    if (vars.empty()) return Factor(1.0);

    std::vector<int> terminals;
    for (VarId v : vars) {
        int node = -1;
        for (size_t c = 0; c < jt.num_nodes(); ++c)
            if (set_contains(jt.clusters[c], v)) {
                node = static_cast<int>(c);
                break;
            }
        if (node < 0) throw StructuralError("variable not present in any cluster");
        terminals.push_back(node);
    }

    // minimal covering subtree: union of paths to the first terminal
    std::vector<int> parent_edge(jt.num_nodes(), -2);
    std::queue<int> q;
    q.push(terminals[0]);
    parent_edge[static_cast<size_t>(terminals[0])] = -1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int e : jt.incident[static_cast<size_t>(u)]) {
            int w = jt.neighbor(u, e);
            if (parent_edge[static_cast<size_t>(w)] != -2) continue;
            parent_edge[static_cast<size_t>(w)] = e;
            q.push(w);
        }
    }
    std::set<int> nodes;
    std::set<int> subtree_edges;
    for (int t : terminals) {
        int u = t;
        while (!nodes.count(u)) {
            nodes.insert(u);
            int e = parent_edge[static_cast<size_t>(u)];
            if (e < 0) break;
            subtree_edges.insert(e);
            u = jt.neighbor(u, e);
        }
    }

    Factor prod(1.0);
    for (int c : nodes) prod = prod.multiply(jt.marginals[static_cast<size_t>(c)]);
    for (int e : subtree_edges) {
        const auto& edge = jt.edges[static_cast<size_t>(e)];
        prod = prod.divide(jt.marginals[static_cast<size_t>(edge.a)].project(edge.separator));
    }
    return prod.project(vars);
}

} // namespace bnc
