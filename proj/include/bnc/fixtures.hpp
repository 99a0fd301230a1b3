#pragma once

#include <cstdint>
#include <random>

#include "bnc/bayesnet.hpp"

namespace bnc::fixtures {

/// Deterministic uniform source; drawing from the raw mt19937_64 stream keeps
/// fixture values identical across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(eng_() % static_cast<uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 eng_;
};

/// Seven-variable running-example structure (A..G, all binary) with seeded
/// CPTs bounded away from zero.
BayesNet figure1_net(uint64_t seed);

/// Y -> v1 -> ... -> v_{n-1}; the single leaf is the feature.
BayesNet random_chain(uint64_t seed, int n, int max_card = 3);

/// Rooted random tree: each non-root picks one earlier parent.
BayesNet random_tree(uint64_t seed, int n, int max_card = 3, int min_leaves = 3);

/// Random DAG with parent sets drawn from earlier variables.
BayesNet random_dag(uint64_t seed, int n, int max_parents = 3, int max_card = 3,
                    int min_leaves = 3);

/// Three-class diagnosis network (root with 3 states, two binary hidden
/// variables, leaves CT/BP/HR) whose class regions reproduce the bundled
/// explanation examples.
BayesNet disease_net();

/// Figure-1 structure with a dominant class-0 prior and near-uninformative
/// features, so partial instantiations decide early.
BayesNet early_decision_net(uint64_t seed);

/// Benchmark-scale synthetic network: 76 binary variables, 34 roots and 16
/// leaves, regenerated internally until the minfill width is at most 10.
BayesNet winscale_net(uint64_t seed);

/// Classifier over the lowest-id root with all leaves (capped) as features.
ClassifierSpec leaf_classifier(const BayesNet& net, Mode mode = Mode::Argmax, double t = 0.5,
                               int threshold_class = 0, int max_features = 8);

} // namespace bnc::fixtures
