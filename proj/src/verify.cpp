#include "bnc/verify.hpp"

#include <algorithm>
#include <sstream>

namespace bnc {

std::string OracleReport::to_record() const {
    std::ostringstream out;
    out << "record=oracle object=" << object << " verdict=" << (pass ? "pass" : "fail");
    for (size_t i = 0; i < class_counts.size(); ++i)
        out << " class" << i << "=" << class_counts[i];
    if (counterexample) {
        out << " counterexample=";
        bool first = true;
        for (const auto& [v, s] : counterexample->assignments()) {
            if (!first) out << ',';
            out << v << ':' << s;
            first = false;
        }
    }
    return out.str();
}

std::vector<std::vector<Instantiation>> oracle_classify_all(const ClassifierSpec& spec,
                                                            const OracleSettings& settings) {
    spec.validate();
    std::vector<int> cards = spec.net.cards_of(spec.features);
    size_t space = 1;
    for (int c : cards) {
        if (space > settings.instance_cap / static_cast<size_t>(c))
            throw CapExceeded("oracle instance space exceeds the cap");
        space *= static_cast<size_t>(c);
    }

    std::vector<std::vector<Instantiation>> classes(
        static_cast<size_t>(spec.num_classes()));
    for (InstantiationIter it(spec.features, cards); !it.done(); it.next()) {
        Instantiation x = it.current();
        Factor joint = joint_query(spec.net, {spec.target}, x);
        int cls = decide_from_joint(spec, joint.values());
        classes[static_cast<size_t>(cls)].push_back(std::move(x));
    }
    return classes;
}

namespace {

// encode a full feature instantiation as the state tuple in feature order
std::vector<int> key_of(const Instantiation& x, const VarSet& features) {
    std::vector<int> key;
    key.reserve(features.size());
    for (VarId f : features) key.push_back(x.at(f));
    return key;
}

OracleReport compare_model_set(const ClassifierSpec& spec, const NnfStore& store, NodeId root,
                               const std::vector<bool>& expected_membership,
                               const std::string& object, const OracleSettings& settings,
                               std::vector<size_t> class_counts) {
    // match store variables to features by name, in feature order
    std::vector<int> store_vars;
    for (VarId f : spec.features) {
        auto idx = store.find_variable(spec.net.variable(f).name);
        if (!idx)
            throw StructuralError("circuit lacks feature variable '" +
                                  spec.net.variable(f).name + "'");
        store_vars.push_back(*idx);
    }

    OracleReport report;
    report.object = object;
    report.pass = true;
    report.class_counts = std::move(class_counts);

    std::vector<int> cards = spec.net.cards_of(spec.features);
    size_t code = 0;
    for (InstantiationIter it(spec.features, cards); !it.done(); it.next(), ++code) {
        Instantiation store_inst;
        for (size_t i = 0; i < spec.features.size(); ++i)
            store_inst.set(store_vars[i], it.states()[static_cast<int>(i)]);
        bool in_circuit = evaluate(store, root, store_inst);
        if (in_circuit != expected_membership[code]) {
            report.pass = false;
            report.counterexample = it.current();
            break;
        }
    }
    (void)settings;
    return report;
}

OracleReport check_against_oracle(const ClassifierSpec& spec, int class_i, const NnfStore& store,
                                  NodeId root, bool complement, const OracleSettings& settings) {
    if (class_i < 0 || class_i >= spec.num_classes())
        throw StructuralError("class index out of range");
    auto classes = oracle_classify_all(spec, settings);

    std::vector<int> cards = spec.net.cards_of(spec.features);
    size_t space = 1;
    for (int c : cards) space *= static_cast<size_t>(c);
    std::vector<bool> member(space, complement);
    // mark class_i instances; everything else keeps the complement default
    std::vector<size_t> counts;
    for (const auto& group : classes) counts.push_back(group.size());
    {
        // codes are lexicographic, matching InstantiationIter order
        std::vector<size_t> strides(spec.features.size());
        size_t s = 1;
        for (size_t i = spec.features.size(); i-- > 0;) {
            strides[i] = s;
            s *= static_cast<size_t>(cards[i]);
        }
        for (const Instantiation& x : classes[static_cast<size_t>(class_i)]) {
            size_t code = 0;
            for (size_t i = 0; i < spec.features.size(); ++i)
                code += strides[i] * static_cast<size_t>(x.at(spec.features[i]));
            member[code] = !complement;
        }
    }
    std::string object = (complement ? "complement_formula_class" : "class_formula_class") +
                         std::to_string(class_i);
    return compare_model_set(spec, store, root, member, object, settings, std::move(counts));
}

} // namespace

OracleReport check_class_formula(const ClassifierSpec& spec, int class_i, const NnfStore& store,
                                 NodeId class_root, const OracleSettings& settings) {
    return check_against_oracle(spec, class_i, store, class_root, false, settings);
}

OracleReport check_complement_formula(const ClassifierSpec& spec, int class_i,
                                      const NnfStore& store, NodeId root,
                                      const OracleSettings& settings) {
    return check_against_oracle(spec, class_i, store, root, true, settings);
}

namespace {

// all completions of the partial store-instantiation satisfy the root
bool term_implies_circuit(const NnfStore& store, NodeId root, const Instantiation& partial,
                          const std::vector<int>& vars) {
    VarSet free_vars;
    std::vector<int> free_cards;
    for (int v : vars)
        if (!partial.contains(v)) {
            free_vars.push_back(v);
            free_cards.push_back(store.var(v).card());
        }
    for (InstantiationIter it(free_vars, free_cards); !it.done(); it.next()) {
        Instantiation full = partial;
        for (const auto& [v, s] : it.current().assignments()) full.set(v, s);
        if (!evaluate(store, root, full)) return false;
    }
    return true;
}

std::vector<int> mentioned_vars(const NnfStore& store, NodeId root) {
    std::vector<int> out;
    for (NodeId id : store.reachable(root)) {
        const NnfNode& n = store.node(id);
        if (n.kind == NodeKind::Literal) out.push_back(n.var);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

NodeId oracle_complete_reason(NnfStore& store, NodeId class_root, const Instantiation& x,
                              const OracleSettings& settings) {
    std::vector<int> vars;
    for (const auto& [v, s] : x.assignments()) vars.push_back(v);
    if (vars.size() > 24) throw CapExceeded("oracle complete reason variable cap exceeded");
    (void)settings;

    // all subset-minimal sub-terms of x that imply the class formula
    std::vector<std::vector<int>> minimal; // subsets as var lists
    size_t subsets = size_t{1} << vars.size();
    std::vector<uint32_t> implying;
    for (uint32_t mask = 0; mask < subsets; ++mask) {
        Instantiation partial;
        for (size_t i = 0; i < vars.size(); ++i)
            if ((mask >> i) & 1) partial.set(vars[i], x.at(vars[i]));
        if (term_implies_circuit(store, class_root, partial, vars))
            implying.push_back(mask);
    }
    std::vector<NodeId> terms;
    for (uint32_t mask : implying) {
        bool min = true;
        for (uint32_t other : implying)
            if (other != mask && (other & mask) == other) min = false;
        if (!min) continue;
        std::vector<NodeId> lits;
        for (size_t i = 0; i < vars.size(); ++i)
            if ((mask >> i) & 1)
                lits.push_back(store.add_literal(vars[i], 1ULL << x.at(vars[i])));
        terms.push_back(lits.empty() ? store.true_node() : store.add_and(std::move(lits)));
    }
    if (terms.empty()) return store.false_node();
    return store.add_or(std::move(terms));
}

NodeId oracle_general_reason(NnfStore& store, NodeId class_root, const Instantiation& x,
                             const OracleSettings& settings) {
    std::vector<int> vars;
    for (const auto& [v, s] : x.assignments()) vars.push_back(v);
    (void)settings;

    // terms whose every literal's state set contains x(v): per variable, any
    // superset of {x(v)} (the full set meaning the variable is absent)
    std::vector<std::vector<uint64_t>> options(vars.size());
    size_t combos = 1;
    for (size_t i = 0; i < vars.size(); ++i) {
        int card = store.var(vars[i]).card();
        uint64_t must = 1ULL << x.at(vars[i]);
        for (uint64_t m = 1; m < (1ULL << card); ++m)
            if (m & must) options[i].push_back(m);
        combos *= options[i].size();
        if (combos > (size_t{1} << 22))
            throw CapExceeded("oracle general reason enumeration cap exceeded");
    }

    std::vector<NodeId> terms;
    std::vector<size_t> idx(vars.size(), 0);
    for (size_t step = 0; step < combos; ++step) {
        // term from the current option tuple; check implication by completion
        bool implies = true;
        {
            VarSet ids;
            std::vector<int> cards;
            for (int v : vars) {
                ids.push_back(v);
                cards.push_back(store.var(v).card());
            }
            for (InstantiationIter it(ids, cards); !it.done() && implies; it.next()) {
                bool consistent = true;
                for (size_t i = 0; i < vars.size(); ++i)
                    if (!((options[i][idx[i]] >> it.states()[static_cast<int>(i)]) & 1))
                        consistent = false;
                if (consistent && !evaluate(store, class_root, it.current())) implies = false;
            }
        }
        if (implies) {
            std::vector<NodeId> lits;
            for (size_t i = 0; i < vars.size(); ++i) {
                uint64_t full = store.full_mask(vars[i]);
                if (options[i][idx[i]] != full)
                    lits.push_back(store.add_literal(vars[i], options[i][idx[i]]));
            }
            terms.push_back(lits.empty() ? store.true_node() : store.add_and(std::move(lits)));
        }
        for (size_t i = vars.size(); i-- > 0;) {
            if (++idx[i] < options[i].size()) break;
            idx[i] = 0;
        }
    }
    if (terms.empty()) return store.false_node();
    return store.add_or(std::move(terms));
}

} // namespace bnc
