#include "bnc/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bnc/jointree.hpp"

namespace bnc::fixtures {

namespace {

// random CPT over {var} + parents, rows bounded away from zero
Factor random_cpt(Rng& rng, const BayesNet& net, VarId var, const std::vector<VarId>& parents) {
    VarSet scope = make_sorted([&] {
        std::vector<VarId> s = parents;
        s.push_back(var);
        return s;
    }());
    std::vector<int> cards;
    for (VarId v : scope) cards.push_back(net.card(v));
    size_t size = 1;
    for (int c : cards) size *= static_cast<size_t>(c);

    std::vector<double> values(size);
    for (double& v : values) v = 0.05 + 0.95 * rng.uniform();

    Factor raw(scope, cards, values);
    VarSet pscope = set_difference(scope, VarSet{var});
    return raw.divide(raw.project(pscope));
}

void fill_random_cpts(Rng& rng, BayesNet& net, const std::vector<std::vector<VarId>>& parents) {
    for (size_t v = 0; v < net.num_vars(); ++v)
        net.set_cpt(static_cast<VarId>(v), parents[v],
                    random_cpt(rng, net, static_cast<VarId>(v), parents[v]));
    net.finalize();
}

std::string var_name(size_t i) { return "v" + std::to_string(i); }

std::vector<std::string> state_names(int card) {
    std::vector<std::string> out;
    for (int s = 0; s < card; ++s) out.push_back("s" + std::to_string(s));
    return out;
}

} // namespace

BayesNet figure1_net(uint64_t seed) {
    Rng rng(seed);
    BayesNet net;
    for (const char* name : {"A", "B", "C", "D", "E", "F", "G"})
        net.add_variable(name, {"f", "t"});
    // A=0 B=1 C=2 D=3 E=4 F=5 G=6
    std::vector<std::vector<VarId>> parents{
        {}, {0, 6}, {0}, {1}, {1, 2}, {1, 2}, {0}};
    fill_random_cpts(rng, net, parents);
    return net;
}

BayesNet random_chain(uint64_t seed, int n, int max_card) {
    if (n < 2) throw StructuralError("chain needs at least 2 variables");
    Rng rng(seed);
    BayesNet net;
    std::vector<std::vector<VarId>> parents;
    for (int i = 0; i < n; ++i) {
        int card = rng.uniform_int(2, max_card);
        net.add_variable(var_name(static_cast<size_t>(i)), state_names(card));
        parents.push_back(i == 0 ? std::vector<VarId>{} : std::vector<VarId>{i - 1});
    }
    fill_random_cpts(rng, net, parents);
    return net;
}

BayesNet random_tree(uint64_t seed, int n, int max_card, int min_leaves) {
    if (n < 2) throw StructuralError("tree needs at least 2 variables");
    for (uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed + attempt * 0x9e3779b97f4a7c15ULL);
        std::vector<std::vector<VarId>> parents(static_cast<size_t>(n));
        for (int i = 1; i < n; ++i) parents[static_cast<size_t>(i)] = {rng.uniform_int(0, i - 1)};
        std::set<VarId> with_child;
        for (int i = 1; i < n; ++i) with_child.insert(parents[static_cast<size_t>(i)][0]);
        int leaves = 0;
        for (int i = 1; i < n; ++i)
            if (!with_child.count(i)) ++leaves;
        if (leaves < std::min(min_leaves, n - 1)) continue;

        BayesNet net;
        for (int i = 0; i < n; ++i)
            net.add_variable(var_name(static_cast<size_t>(i)),
                             state_names(rng.uniform_int(2, max_card)));
        fill_random_cpts(rng, net, parents);
        return net;
    }
}

BayesNet random_dag(uint64_t seed, int n, int max_parents, int max_card, int min_leaves) {
    if (n < 2) throw StructuralError("dag needs at least 2 variables");
    for (uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed + attempt * 0x9e3779b97f4a7c15ULL);
        std::vector<std::vector<VarId>> parents(static_cast<size_t>(n));
        for (int i = 1; i < n; ++i) {
            int k = rng.uniform_int(0, std::min(max_parents, i));
            std::set<VarId> chosen;
            while (static_cast<int>(chosen.size()) < k) chosen.insert(rng.uniform_int(0, i - 1));
            parents[static_cast<size_t>(i)].assign(chosen.begin(), chosen.end());
        }
        std::set<VarId> with_child;
        for (int i = 1; i < n; ++i)
            for (VarId p : parents[static_cast<size_t>(i)]) with_child.insert(p);
        int leaves = 0;
        for (int i = 1; i < n; ++i)
            if (!with_child.count(i)) ++leaves;
        if (leaves < std::min(min_leaves, n - 1)) continue;

        BayesNet net;
        for (int i = 0; i < n; ++i)
            net.add_variable(var_name(static_cast<size_t>(i)),
                             state_names(rng.uniform_int(2, max_card)));
        fill_random_cpts(rng, net, parents);
        return net;
    }
}

BayesNet disease_net() {
    BayesNet net;
    VarId d = net.add_variable("D", {"0", "1", "2"});
    VarId x = net.add_variable("X", {"f", "t"});
    VarId y = net.add_variable("Y", {"f", "t"});
    VarId ct = net.add_variable("CT", {"f", "t"});
    VarId bp = net.add_variable("BP", {"Low", "Normal", "High"});
    VarId hr = net.add_variable("HR", {"Low", "Normal", "High"});

    // class -> hidden pair: 0 -> (f,f), 1 -> (f,t), 2 -> (t,t)
    // leaf distributions encode additive log-scores per class so the argmax
    // regions match the bundled circuit fixtures
    const double delta_ct = 3.0;             // shared by classes 1 and 2 (same Y)
    const double u1[3] = {-9.0, -1.0, -9.0}; // BP scores, class 1
    const double w1[3] = {-9.0, 0.5, 0.5};   // HR scores, class 1
    const double u2[3] = {0.8, -9.0, 1.5};   // BP scores, class 2
    const double w2[3] = {-4.0, 0.5, 0.5};   // HR scores, class 2

    auto dist = [](const double* score, int k) {
        std::vector<double> v(static_cast<size_t>(k));
        double z = 0;
        for (int i = 0; i < k; ++i) z += std::exp(score[i]);
        for (int i = 0; i < k; ++i) v[static_cast<size_t>(i)] = std::exp(score[i]) / z;
        return v;
    };
    auto zconst = [](const double* score, int k) {
        double z = 0;
        for (int i = 0; i < k; ++i) z += std::exp(score[i]) / k;
        return z;
    };
    const double zero2[2] = {0, 0};
    const double zero3[3] = {0, 0, 0};
    const double ct_score[2] = {0, delta_ct};

    // P(D) absorbs the per-class normalizers so the joint stays proportional
    // to exp(score sum)
    double z1 = zconst(u1, 3) * zconst(ct_score, 2) * zconst(w1, 3);
    double z2 = zconst(u2, 3) * zconst(ct_score, 2) * zconst(w2, 3);
    double zsum = 1.0 + z1 + z2;
    net.set_cpt(d, {}, Factor({d}, {3}, {1.0 / zsum, z1 / zsum, z2 / zsum}));

    // deterministic hidden layer
    net.set_cpt(x, {d}, Factor({x, d}, {2, 3}, {/*d0*/ 1, 0, /*d1*/ 1, 0, /*d2*/ 0, 1}));
    net.set_cpt(y, {d, x},
                Factor({y, d, x}, {2, 3, 2},
                       {/*d0,x0*/ 1, 0, /*d0,x1*/ 1, 0, /*d1,x0*/ 0, 1, /*d1,x1*/ 1, 0,
                        /*d2,x0*/ 1, 0, /*d2,x1*/ 0, 1}));

    auto rows3 = [&](const double* s00, const double* s01, const double* s10,
                     const double* s11) {
        std::vector<double> vals;
        for (const double* s : {s00, s01, s10, s11}) {
            auto v = dist(s, 3);
            vals.insert(vals.end(), v.begin(), v.end());
        }
        return vals;
    };
    // scope (var, x, y) canonicalizes to ids (x, y, var); rows keyed by (x,y)
    net.set_cpt(bp, {x, y}, Factor({x, y, bp}, {2, 2, 3}, rows3(zero3, u1, zero3, u2)));
    net.set_cpt(hr, {x, y}, Factor({x, y, hr}, {2, 2, 3}, rows3(zero3, w1, zero3, w2)));
    {
        auto q0 = dist(zero2, 2), q1 = dist(ct_score, 2);
        net.set_cpt(ct, {y}, Factor({y, ct}, {2, 2}, {q0[0], q0[1], q1[0], q1[1]}));
    }
    net.finalize();
    return net;
}

BayesNet early_decision_net(uint64_t seed) {
    Rng rng(seed);
    BayesNet net;
    for (const char* name : {"A", "B", "C", "D", "E", "F", "G"})
        net.add_variable(name, {"f", "t"});
    std::vector<std::vector<VarId>> parents{
        {}, {0, 6}, {0}, {1}, {1, 2}, {1, 2}, {0}};
    net.set_cpt(0, {}, Factor({0}, {2}, {0.95, 0.05}));
    for (VarId v = 1; v < 7; ++v) {
        VarSet scope = make_sorted([&] {
            std::vector<VarId> s = parents[static_cast<size_t>(v)];
            s.push_back(v);
            return s;
        }());
        std::vector<int> cards;
        for (VarId s : scope) cards.push_back(net.card(s));
        size_t size = 1;
        for (int c : cards) size *= static_cast<size_t>(c);
        std::vector<double> values(size);
        for (double& val : values) val = 0.45 + 0.10 * rng.uniform();
        Factor raw(scope, cards, values);
        VarSet pscope = set_difference(scope, VarSet{v});
        net.set_cpt(v, parents[static_cast<size_t>(v)], raw.divide(raw.project(pscope)));
    }
    net.finalize();
    return net;
}

BayesNet winscale_net(uint64_t seed) {
    constexpr int kRoots = 34, kInternal = 26, kLeaves = 16;
    constexpr int kTotal = kRoots + kInternal + kLeaves;
    for (uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed + attempt * 0x9e3779b97f4a7c15ULL);
        std::vector<std::vector<VarId>> parents(kTotal);
        // locality-biased parents keep the treewidth low
        for (int i = kRoots; i < kTotal; ++i) {
            int hi = (i < kRoots + kInternal) ? i - 1 : kRoots + kInternal - 1;
            int lo = std::max(0, hi - 11);
            int k = 1 + (rng.uniform_int(0, 99) < 55 ? 1 : 0) +
                    (rng.uniform_int(0, 99) < 15 ? 1 : 0);
            std::set<VarId> chosen;
            while (static_cast<int>(chosen.size()) < std::min(k, hi - lo + 1))
                chosen.insert(rng.uniform_int(lo, hi));
            parents[static_cast<size_t>(i)].assign(chosen.begin(), chosen.end());
        }
        // every root and internal variable must keep a child so the leaf set
        // stays exactly the last 16 variables
        std::set<VarId> with_child;
        for (int i = kRoots; i < kTotal; ++i)
            for (VarId p : parents[static_cast<size_t>(i)]) with_child.insert(p);
        bool ok = true;
        for (int i = 0; i < kRoots + kInternal && ok; ++i)
            if (!with_child.count(i)) {
                // graft as an extra parent of a later non-leaf (or a leaf)
                int lo = std::max(i + 1, kRoots);
                int target = -1;
                for (int j = lo; j < kTotal; ++j)
                    if (parents[static_cast<size_t>(j)].size() < 3 &&
                        !set_contains(parents[static_cast<size_t>(j)], i)) {
                        target = j;
                        break;
                    }
                if (target < 0) {
                    ok = false;
                    break;
                }
                parents[static_cast<size_t>(target)].push_back(i);
                std::sort(parents[static_cast<size_t>(target)].begin(),
                          parents[static_cast<size_t>(target)].end());
                with_child.insert(i);
            }
        if (!ok) continue;

        BayesNet net;
        for (int i = 0; i < kTotal; ++i)
            net.add_variable(var_name(static_cast<size_t>(i)), state_names(2));
        fill_random_cpts(rng, net, parents);

        if (build_jointree(net, minfill_order(net)).width() <= 10) return net;
    }
}

ClassifierSpec leaf_classifier(const BayesNet& net, Mode mode, double t, int threshold_class,
                               int max_features) {
    ClassifierSpec spec;
    spec.net = net;
    spec.target = -1;
    for (size_t v = 0; v < net.num_vars(); ++v)
        if (net.is_root(static_cast<VarId>(v))) {
            spec.target = static_cast<VarId>(v);
            break;
        }
    if (spec.target < 0) throw StructuralError("network has no root variable");
    for (VarId leaf : spec.net.leaves()) {
        if (leaf == spec.target) continue;
        if (static_cast<int>(spec.features.size()) >= max_features) break;
        spec.features.push_back(leaf);
    }
    spec.mode = mode;
    spec.threshold = t;
    spec.threshold_class = threshold_class;
    spec.validate();
    return spec;
}

} // namespace bnc::fixtures
