#pragma once

// Shared hand-built fixtures for the unit tests.

#include "bnc/bayesnet.hpp"
#include "bnc/factor.hpp"
#include "bnc/jointree.hpp"

namespace testsupport {

// Two-variable chain Y -> X with P(y0)=0.6, P(x0|y0)=0.9, P(x0|y1)=0.2.
inline bnc::BayesNet two_var_net() {
    bnc::BayesNet net;
    bnc::VarId y = net.add_variable("Y", {"y0", "y1"});
    bnc::VarId x = net.add_variable("X", {"x0", "x1"});
    net.set_cpt(y, {}, bnc::Factor({y}, {2}, {0.6, 0.4}));
    net.set_cpt(x, {y}, bnc::Factor({x, y}, {2, 2}, {0.9, 0.2, 0.1, 0.8}));
    net.finalize();
    return net;
}

inline bnc::ClassifierSpec two_var_spec(bnc::Mode mode = bnc::Mode::Argmax, double t = 0.5) {
    bnc::ClassifierSpec spec;
    spec.net = two_var_net();
    spec.target = 0;
    spec.features = {1};
    spec.mode = mode;
    spec.threshold = t;
    spec.threshold_class = 0;
    return spec;
}

inline bnc::Jointree make_jointree(const bnc::BayesNet& net,
                                   std::vector<bnc::VarSet> clusters,
                                   std::vector<std::pair<int, int>> edges) {
    bnc::Jointree jt;
    jt.clusters = std::move(clusters);
    jt.incident.assign(jt.clusters.size(), {});
    for (auto [a, b] : edges) {
        jt.edges.push_back({a, b,
                            bnc::set_intersect(jt.clusters[static_cast<size_t>(a)],
                                               jt.clusters[static_cast<size_t>(b)])});
        jt.incident[static_cast<size_t>(a)].push_back(static_cast<int>(jt.edges.size()) - 1);
        jt.incident[static_cast<size_t>(b)].push_back(static_cast<int>(jt.edges.size()) - 1);
    }
    jt.cpt_owner.assign(net.num_vars(), -1);
    for (size_t v = 0; v < net.num_vars(); ++v) {
        bnc::VarSet fam = net.family(static_cast<bnc::VarId>(v));
        for (size_t c = 0; c < jt.clusters.size(); ++c)
            if (bnc::is_subset(fam, jt.clusters[c])) {
                jt.cpt_owner[v] = static_cast<int>(c);
                break;
            }
    }
    return jt;
}

// The six-node cluster tree of the running example, keeping the non-maximal
// {B,C} node. Variable ids: A=0 B=1 C=2 D=3 E=4 F=5 G=6.
// Node order places {B,C,E} before {B,C,F} so the orientation tie falls on
// the {B,C,E} side.
inline bnc::Jointree fig4_jointree(const bnc::BayesNet& fig1) {
    using bnc::VarSet;
    std::vector<VarSet> clusters{
        {0, 1, 6},    // 0: A,B,G
        {0, 1, 2},    // 1: A,B,C
        {1, 2},       // 2: B,C
        {1, 2, 4},    // 3: B,C,E
        {1, 2, 5},    // 4: B,C,F
        {1, 3},       // 5: B,D
    };
    return make_jointree(fig1, std::move(clusters),
                         {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {1, 5}});
}

inline bnc::ClassifierSpec fig1_spec(const bnc::BayesNet& net) {
    bnc::ClassifierSpec spec;
    spec.net = net;
    spec.target = 0;          // A
    spec.features = {3, 4, 5}; // D, E, F
    return spec;
}

} // namespace testsupport
