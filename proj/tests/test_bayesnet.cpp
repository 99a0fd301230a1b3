#include "doctest.h"

#include <random>

#include "bnc/bayesnet.hpp"
#include "bnc/fixtures.hpp"
#include "support.hpp"

using namespace bnc;

TEST_CASE("joint_query with evidence matches the hand computation") {
    BayesNet net = testsupport::two_var_net();
    Instantiation e;
    e.set(1, 0); // X = x0
    Factor out = joint_query(net, {0}, e);
    CHECK(out.values()[0] == doctest::Approx(0.54).epsilon(1e-12));
    CHECK(out.values()[1] == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("joint_query with full evidence equals the product of CPT entries") {
    BayesNet net = fixtures::figure1_net(99);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Instantiation x;
        double expect = 1.0;
        for (size_t v = 0; v < net.num_vars(); ++v)
            x.set(static_cast<VarId>(v), static_cast<int>(rng() % 2));
        for (size_t v = 0; v < net.num_vars(); ++v)
            expect *= net.cpt(static_cast<VarId>(v)).at(x);
        Factor out = joint_query(net, {}, x);
        CHECK(out.scalar() == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("joint_query without evidence is normalized") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        BayesNet net = fixtures::random_dag(seed, 8, 5);
        Factor out = joint_query(net, {0}, Instantiation{});
        CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("classify picks the class with the larger joint") {
    ClassifierSpec spec = testsupport::two_var_spec();
    Instantiation x;
    x.set(1, 0);
    CHECK(classify(spec, x) == 0); // 0.54 > 0.08
    x.set(1, 1);
    CHECK(classify(spec, x) == 1); // 0.06 < 0.32
}

TEST_CASE("argmax ties break to the lowest class index") {
    ClassifierSpec spec;
    bool tie = false;
    spec.mode = Mode::Argmax;
    CHECK(decide_from_joint(spec, {0.25, 0.25}, &tie) == 0);
    CHECK(tie);
    CHECK(decide_from_joint(spec, {0.1, 0.3, 0.3}, &tie) == 1);
    CHECK(tie);
    CHECK(decide_from_joint(spec, {0.0, 0.0}, &tie) == 0);
    CHECK(tie);
}

TEST_CASE("threshold mode applies the strict posterior test") {
    ClassifierSpec spec = testsupport::two_var_spec(Mode::Threshold, 0.5);
    Instantiation x;
    x.set(1, 0);
    // P(y0|x0) = 0.54/0.62 > 0.5
    CHECK(classify(spec, x) == 0);

    // equality at the threshold goes to the other class
    bool tie = false;
    CHECK(decide_from_joint(spec, {0.3, 0.3}, &tie) == 1);
    CHECK(tie);
}

TEST_CASE("zero-probability instances raise a degenerate-instance error") {
    BayesNet net;
    VarId y = net.add_variable("Y", {"y0", "y1"});
    VarId x = net.add_variable("X", {"x0", "x1"});
    net.set_cpt(y, {}, Factor({y}, {2}, {1.0, 0.0}));
    net.set_cpt(x, {y}, Factor({x, y}, {2, 2}, {1.0, 0.5, 0.0, 0.5}));
    net.finalize();
    ClassifierSpec spec;
    spec.net = net;
    spec.target = y;
    spec.features = {x};
    Instantiation inst;
    inst.set(x, 1); // P(x1) = 0
    CHECK_THROWS_AS(classify(spec, inst), DegenerateInstance);
}

TEST_CASE("classify requires a full feature instantiation") {
    ClassifierSpec spec = testsupport::two_var_spec();
    CHECK_THROWS_AS(classify(spec, Instantiation{}), UsageError);
}

TEST_CASE("classifier contract violations are structural errors") {
    ClassifierSpec spec = testsupport::two_var_spec();
    spec.target = 1; // not a root
    CHECK_THROWS_AS(spec.validate(), StructuralError);

    spec = testsupport::two_var_spec();
    spec.features = {0}; // target as feature
    spec.target = 0;
    CHECK_THROWS_AS(spec.validate(), StructuralError);

    spec = testsupport::two_var_spec(Mode::Threshold, 1.5);
    CHECK_THROWS_AS(spec.validate(), StructuralError);
}

TEST_CASE("CPT rows slightly off one are renormalized with a warning") {
    BayesNet net;
    VarId y = net.add_variable("Y", {"y0", "y1"});
    net.set_cpt(y, {}, Factor({y}, {2}, {0.6, 0.3999995}));
    auto warnings = net.finalize();
    REQUIRE(warnings.size() == 1);
    CHECK(net.cpt(y).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("CPT rows far from one are rejected") {
    BayesNet net;
    VarId y = net.add_variable("Y", {"y0", "y1"});
    net.set_cpt(y, {}, Factor({y}, {2}, {0.6, 0.3}));
    CHECK_THROWS_AS(net.finalize(), StructuralError);
}

TEST_CASE("cyclic parent graphs are rejected") {
    BayesNet net;
    VarId a = net.add_variable("A", {"0", "1"});
    VarId b = net.add_variable("B", {"0", "1"});
    net.set_cpt(a, {b}, Factor({a, b}, {2, 2}, {0.5, 0.5, 0.5, 0.5}));
    net.set_cpt(b, {a}, Factor({b, a}, {2, 2}, {0.5, 0.5, 0.5, 0.5}));
    CHECK_THROWS_AS(net.finalize(), StructuralError);
}

TEST_CASE("argmax of joints agrees with an implementation that normalizes first") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        BayesNet net = fixtures::random_dag(seed, 7, 4);
        ClassifierSpec spec = fixtures::leaf_classifier(net);
        InstantiationIter it(spec.features, net.cards_of(spec.features));
        for (; !it.done(); it.next()) {
            Instantiation x = it.current();
            Factor joint = joint_query(net, {spec.target}, x);
            // posterior-normalizing reference
            double total = joint.sum();
            REQUIRE(total > 0.0);
            int ref = 0;
            for (size_t i = 1; i < joint.values().size(); ++i)
                if (joint.values()[i] / total > joint.values()[ref] / total)
                    ref = static_cast<int>(i);
            CHECK(classify(spec, x) == ref);
        }
    }
}
