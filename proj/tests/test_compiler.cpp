#include "doctest.h"

#include <set>

#include "bnc/compiler.hpp"
#include "bnc/fixtures.hpp"
#include "bnc/verify.hpp"
#include "support.hpp"

using namespace bnc;

namespace {

struct PreparedProblem {
    BayesNet net;
    ClassifierSpec spec;
    Jointree jt;
    FTree ft;
};

PreparedProblem prepare(BayesNet net, ClassifierSpec spec) {
    PreparedProblem p;
    p.net = std::move(net);
    p.spec = std::move(spec);
    p.jt = build_jointree(p.spec.net, minfill_order(p.spec.net));
    p.jt = calibrate(normalize_shape(std::move(p.jt), p.spec.net, p.spec.features), p.spec.net);
    p.ft = extract_ftree(p.jt, p.spec);
    return p;
}

PreparedProblem prepared_fig1(uint64_t seed) {
    BayesNet net = fixtures::figure1_net(seed);
    return prepare(net, testsupport::fig1_spec(net));
}

} // namespace

TEST_CASE("decide_negative applies the entrywise sign tests") {
    PreparedProblem p = prepared_fig1(201);
    CompileContext ctx(p.spec, p.ft, 0, false, CompileSettings{});

    // M over {Y, S} with S = {B}: hand-crafted delta patterns (Y=A id 0, B id 1)
    auto M = [&](double i0, double i1, double j0, double j1) {
        return Factor({0, 1}, {2, 2}, {i0, i1, j0, j1});
    };
    // delta <= 0 everywhere: class 0 negative
    CHECK(decide_negative(M(0.1, 0.2, 0.3, 0.4), {1}, 0, ctx) == Decision::Negative);
    // delta > 0 everywhere and only one rival class: positive
    CHECK(decide_negative(M(0.3, 0.4, 0.1, 0.2), {1}, 0, ctx) == Decision::Positive);
    // mixed signs: undecided
    CHECK(decide_negative(M(0.3, 0.1, 0.1, 0.2), {1}, 0, ctx) == Decision::Undecided);
    // separator touching the target or a feature: undecided
    CHECK(decide_negative(M(0.1, 0.2, 0.3, 0.4), {0, 1}, 0, ctx) == Decision::Undecided);
    CHECK(ctx.tie_log.empty());
}

TEST_CASE("decide_negative logs exact ties") {
    PreparedProblem p = prepared_fig1(202);
    CompileContext ctx(p.spec, p.ft, 0, false, CompileSettings{});
    Factor m({0, 1}, {2, 2}, {0.1, 0.3, 0.1, 0.4});
    CHECK(decide_negative(m, {1}, 0, ctx) == Decision::Negative);
    CHECK(ctx.stats.tie_count == 1);
}

TEST_CASE("decide verdicts agree with the oracle on all completions") {
    for (uint64_t seed = 210; seed < 240; ++seed) {
        BayesNet net = fixtures::random_dag(seed, 9, 3);
        ClassifierSpec spec = fixtures::leaf_classifier(net, Mode::Argmax, 0.5, 0, 6);
        PreparedProblem p = prepare(net, spec);
        auto classes = oracle_classify_all(p.spec);

        for (int cls = 0; cls < p.spec.num_classes(); ++cls) {
            CompileContext ctx(p.spec, p.ft, cls, false, CompileSettings{});
            for (size_t q = 0; q < p.ft.num_nodes(); ++q) {
                if (static_cast<int>(q) == p.ft.root) continue;
                auto split = split_partition(p.ft, static_cast<int>(q));
                if (!split) continue;
                const auto& [u_vars, v_vars] = *split;
                if (u_vars.size() > 5) continue;

                std::vector<int> ucards = p.spec.net.cards_of(u_vars);
                for (InstantiationIter uit(u_vars, ucards); !uit.done(); uit.next()) {
                    Instantiation u = uit.current();
                    Factor m = joint_query(
                        p.spec.net, set_union(VarSet{p.spec.target}, p.ft.sep_parent[q]), u);
                    Decision d = decide_negative(m, p.ft.sep_parent[q], cls, ctx);
                    if (d == Decision::Undecided) continue;

                    // oracle: classify every completion of u
                    std::vector<int> vcards = p.spec.net.cards_of(v_vars);
                    bool all_negative = true, all_positive = true;
                    for (InstantiationIter vit(v_vars, vcards); !vit.done(); vit.next()) {
                        Instantiation x = u;
                        for (const auto& [var, st] : vit.current().assignments())
                            x.set(var, st);
                        bool in_class = false;
                        for (const Instantiation& member :
                             classes[static_cast<size_t>(cls)])
                            if (member == x) in_class = true;
                        (in_class ? all_negative : all_positive) = false;
                    }
                    if (d == Decision::Negative) CHECK(all_negative);
                    if (d == Decision::Positive) CHECK(all_positive);
                }
            }
            CHECK(ctx.stats.tie_count == 0);
        }
    }
}

TEST_CASE("get_instances returns conditionals that sum to one per separator entry") {
    PreparedProblem p = prepared_fig1(203);
    CompileContext ctx(p.spec, p.ft, 0, false, CompileSettings{});
    for (size_t q = 0; q < p.ft.num_nodes(); ++q) {
        if (static_cast<int>(q) == p.ft.root) continue;
        const SubtreeInstances& inst = get_instances(ctx, static_cast<int>(q));
        REQUIRE_FALSE(inst.items.empty());

        Factor psep = joint_query(p.spec.net, p.ft.sep_parent[q], Instantiation{});
        std::vector<double> sums(psep.size(), 0.0);
        for (const auto& [v, pr] : inst.items) {
            REQUIRE(pr.scope() == p.ft.sep_parent[q]);
            for (size_t i = 0; i < pr.size(); ++i) {
                CHECK(pr.values()[i] >= 0.0);
                CHECK(pr.values()[i] <= 1.0 + 1e-12);
                sums[i] += pr.values()[i];
            }
        }
        for (size_t i = 0; i < sums.size(); ++i)
            if (psep.values()[i] > 0.0)
                CHECK(sums[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("get_instances matches the inference oracle on the {B,D} leaf") {
    PreparedProblem p = prepared_fig1(204);
    CompileContext ctx(p.spec, p.ft, 0, false, CompileSettings{});
    // find the {B,D} leaf: V = {D}, separator {B}
    for (size_t q = 0; q < p.ft.num_nodes(); ++q) {
        if (p.ft.cluster[q] != VarSet{1, 3}) continue;
        const SubtreeInstances& inst = get_instances(ctx, static_cast<int>(q));
        REQUIRE(inst.items.size() == 2);
        Factor pdb = joint_query(p.spec.net, {1, 3}, Instantiation{});
        Factor pb = joint_query(p.spec.net, {1}, Instantiation{});
        for (const auto& [v, pr] : inst.items) {
            Factor expect = pdb.reduce(v).divide(pb);
            for (size_t i = 0; i < pr.size(); ++i)
                CHECK(pr.values()[i] == doctest::Approx(expect.values()[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("the instance cache is keyed by node and reused") {
    PreparedProblem p = prepared_fig1(205);
    CompileContext ctx(p.spec, p.ft, 0, false, CompileSettings{});
    int left = p.ft.left[static_cast<size_t>(p.ft.root)];
    REQUIRE(left >= 0);
    const SubtreeInstances& a = get_instances(ctx, left);
    const SubtreeInstances& b = get_instances(ctx, left);
    CHECK(&a == &b);
}

TEST_CASE("compiled class formulas match the oracle exactly") {
    for (uint64_t seed = 300; seed < 330; ++seed) {
        BayesNet net;
        switch (seed % 4) {
        case 0: net = fixtures::figure1_net(seed); break;
        case 1: net = fixtures::random_chain(seed, 4 + seed % 5); break;
        case 2: net = fixtures::random_tree(seed, 7 + seed % 4); break;
        default: net = fixtures::random_dag(seed, 8 + seed % 5, 3); break;
        }
        ClassifierSpec spec = fixtures::leaf_classifier(net);
        PreparedProblem p = prepare(net, spec);
        for (int cls = 0; cls < p.spec.num_classes(); ++cls) {
            CompileResult result = compile_class_formula(p.spec, p.ft, cls);
            CHECK(result.tie_log.empty());
            OracleReport report = check_class_formula(p.spec, cls, result.store, result.root);
            CHECK(report.pass);
            CHECK(check_and_decomposable(result.store, result.pre_negation_root).ok);
            CHECK(check_or_decomposable(result.store, result.root).ok);
        }
    }
}

TEST_CASE("class formulas partition the instance space") {
    for (uint64_t seed = 340; seed < 352; ++seed) {
        BayesNet net = fixtures::random_dag(seed, 9, 3);
        ClassifierSpec spec = fixtures::leaf_classifier(net, Mode::Argmax, 0.5, 0, 6);
        PreparedProblem p = prepare(net, spec);

        std::vector<CompileResult> formulas;
        for (int cls = 0; cls < p.spec.num_classes(); ++cls)
            formulas.push_back(compile_class_formula(p.spec, p.ft, cls));

        std::vector<int> cards = p.spec.net.cards_of(p.spec.features);
        for (InstantiationIter it(p.spec.features, cards); !it.done(); it.next()) {
            int members = 0;
            for (const CompileResult& f : formulas) {
                Instantiation store_inst;
                for (size_t i = 0; i < p.spec.features.size(); ++i)
                    store_inst.set(static_cast<int>(i),
                                   it.states()[i]);
                if (evaluate(f.store, f.root, store_inst)) ++members;
            }
            CHECK(members == 1);
        }
    }
}

TEST_CASE("a class that wins every instance compiles to TRUE") {
    BayesNet net = fixtures::early_decision_net(7);
    PreparedProblem p = prepare(net, testsupport::fig1_spec(net));
    CompileResult result = compile_class_formula(p.spec, p.ft, 0);
    // the formula holds every instance: its negation is empty
    CHECK(enumerate_models(result.store, result.root, result.store_vars()).size() == 8);
    CHECK(result.stats.node_count == 1); // a single TRUE node

    CompileResult loser = compile_class_formula(p.spec, p.ft, 1);
    CHECK(enumerate_models(loser.store, loser.root, loser.store_vars()).empty());
}

TEST_CASE("early decisions prune leaf evaluations") {
    BayesNet net = fixtures::early_decision_net(8);
    PreparedProblem p = prepare(net, testsupport::fig1_spec(net));
    size_t dom = 8; // three binary features
    for (int cls = 0; cls < 2; ++cls) {
        CompileResult result = compile_class_formula(p.spec, p.ft, cls);
        CHECK(result.stats.decide_hits > 0);
        CHECK(result.stats.leaf_evaluations < static_cast<long>(dom));
        OracleReport report = check_class_formula(p.spec, cls, result.store, result.root);
        CHECK(report.pass);
    }
}

TEST_CASE("leaf evaluations never exceed the instance space") {
    for (uint64_t seed = 360; seed < 372; ++seed) {
        BayesNet net = fixtures::random_dag(seed, 8, 3);
        ClassifierSpec spec = fixtures::leaf_classifier(net, Mode::Argmax, 0.5, 0, 6);
        PreparedProblem p = prepare(net, spec);
        size_t dom = 1;
        for (int c : p.spec.net.cards_of(p.spec.features)) dom *= static_cast<size_t>(c);
        for (int cls = 0; cls < p.spec.num_classes(); ++cls) {
            CompileResult result = compile_class_formula(p.spec, p.ft, cls);
            CHECK(result.stats.leaf_evaluations <= static_cast<long>(dom));
        }
    }
}

TEST_CASE("node counts stay within the size bound") {
    for (uint64_t seed = 380; seed < 400; ++seed) {
        BayesNet net = fixtures::random_dag(seed, 9, 3);
        ClassifierSpec spec = fixtures::leaf_classifier(net);
        PreparedProblem p = prepare(net, spec);
        size_t dom = 1;
        for (int c : p.spec.net.cards_of(p.spec.features)) dom *= static_cast<size_t>(c);
        size_t bound = p.spec.features.size() * dom;
        for (int cls = 0; cls < p.spec.num_classes(); ++cls) {
            CompileResult result = compile_class_formula(p.spec, p.ft, cls);
            CHECK(result.stats.node_count <= bound);
        }
    }
}

TEST_CASE("threshold-mode formulas match the oracle under the strict rule") {
    for (uint64_t seed = 410; seed < 430; ++seed) {
        BayesNet net = fixtures::random_dag(seed, 8, 3, 2); // binary target needed
        ClassifierSpec spec = fixtures::leaf_classifier(net, Mode::Threshold, 0.35, 0);
        if (spec.net.card(spec.target) != 2) continue;
        PreparedProblem p = prepare(net, spec);
        for (int cls = 0; cls < 2; ++cls) {
            CompileResult result = compile_class_formula(p.spec, p.ft, cls);
            OracleReport report = check_class_formula(p.spec, cls, result.store, result.root);
            CHECK(report.pass);
        }
    }
}

TEST_CASE("complement formulas hold exactly the instances outside the class") {
    for (uint64_t seed = 440; seed < 452; ++seed) {
        BayesNet net = fixtures::random_dag(seed, 8, 3);
        ClassifierSpec spec = fixtures::leaf_classifier(net, Mode::Argmax, 0.5, 0, 6);
        PreparedProblem p = prepare(net, spec);
        for (int cls = 0; cls < p.spec.num_classes(); ++cls) {
            CompileResult complement = compile_complement(p.spec, p.ft, cls);
            OracleReport report =
                check_complement_formula(p.spec, cls, complement.store, complement.root);
            CHECK(report.pass);
            CHECK(check_or_decomposable(complement.store, complement.root).ok);

            // definitional identity: complement == negate(class formula)
            CompileResult direct = compile_class_formula(p.spec, p.ft, cls);
            NodeId negated = negate(direct.store, direct.root);
            // compare by model sets over the shared feature order
            auto a = enumerate_models(complement.store, complement.root,
                                      complement.store_vars());
            auto b = enumerate_models(direct.store, negated, direct.store_vars());
            CHECK(a == b);
        }
    }
}

TEST_CASE("a partial instantiation decided negative skips the subtree") {
    BayesNet net = fixtures::early_decision_net(9);
    PreparedProblem p = prepare(net, testsupport::fig1_spec(net));
    // class 1 loses everywhere: the first split decides and no leaf is touched
    CompileResult result = compile_class_formula(p.spec, p.ft, 1);
    CHECK(result.stats.leaf_evaluations == 0);
    CHECK(result.stats.decide_hits > 0);
    OracleReport report = check_class_formula(p.spec, 1, result.store, result.root);
    CHECK(report.pass);
}

TEST_CASE("compilation deadlines surface as CapExceeded") {
    BayesNet net = fixtures::figure1_net(206);
    PreparedProblem p = prepare(net, testsupport::fig1_spec(net));
    CompileSettings settings;
    settings.has_deadline = true;
    settings.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    CHECK_THROWS_AS(compile_class_formula(p.spec, p.ft, 0, settings), CapExceeded);
}

TEST_CASE("stats records render as one key=value line") {
    PreparedProblem p = prepared_fig1(207);
    CompileResult result = compile_class_formula(p.spec, p.ft, 0);
    std::string record = result.stats.to_record("compile");
    CHECK(record.find("record=compile") == 0);
    CHECK(record.find("omega_t=") != std::string::npos);
    CHECK(record.find("nodes=") != std::string::npos);
    CHECK(record.find('\n') == std::string::npos);
}
