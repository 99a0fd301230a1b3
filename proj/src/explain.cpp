#include "bnc/explain.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace bnc {

bool TermOrClause::operator==(const TermOrClause& o) const {
    if (literals.size() != o.literals.size()) return false;
    for (size_t i = 0; i < literals.size(); ++i)
        if (literals[i].var != o.literals[i].var || literals[i].states != o.literals[i].states)
            return false;
    return true;
}

bool TermOrClause::operator<(const TermOrClause& o) const {
    if (literals.size() != o.literals.size()) return literals.size() < o.literals.size();
    for (size_t i = 0; i < literals.size(); ++i) {
        if (literals[i].var != o.literals[i].var) return literals[i].var < o.literals[i].var;
        if (literals[i].states != o.literals[i].states)
            return literals[i].states < o.literals[i].states;
    }
    return false;
}

std::vector<int> TermOrClause::variables() const {
    std::vector<int> out;
    out.reserve(literals.size());
    for (const MvLiteral& l : literals) out.push_back(l.var);
    return out;
}

namespace {

// single linear pass: literal filter plus constant propagation
NodeId filter_circuit(NnfStore& store, NodeId root, const Instantiation& x, bool general) {
    std::vector<NodeId> order = store.reachable(root);
    std::map<NodeId, NodeId> out;
    for (NodeId id : order) {
        const NnfNode n = store.node(id); // copy: appends may reallocate
        switch (n.kind) {
        case NodeKind::True:
            out[id] = store.true_node();
            break;
        case NodeKind::False:
            out[id] = store.false_node();
            break;
        case NodeKind::Literal: {
            if (!x.contains(n.var))
                throw UsageError("instance does not assign circuit variable '" +
                                 store.var(n.var).name + "'");
            int s = x.at(n.var);
            if ((n.states >> s) & 1)
                out[id] = general ? id : store.add_literal(n.var, 1ULL << s);
            else
                out[id] = store.false_node();
            break;
        }
        case NodeKind::And: {
            std::vector<NodeId> children;
            bool is_false = false;
            for (NodeId c : n.children) {
                NodeId m = out.at(c);
                if (store.node(m).kind == NodeKind::False) is_false = true;
                if (store.node(m).kind == NodeKind::True) continue;
                children.push_back(m);
            }
            if (is_false)
                out[id] = store.false_node();
            else if (children.empty())
                out[id] = store.true_node();
            else
                out[id] = store.add_and(std::move(children));
            break;
        }
        case NodeKind::Or: {
            std::vector<NodeId> children;
            bool is_true = false;
            for (NodeId c : n.children) {
                NodeId m = out.at(c);
                if (store.node(m).kind == NodeKind::True) is_true = true;
                if (store.node(m).kind == NodeKind::False) continue;
                children.push_back(m);
            }
            if (is_true)
                out[id] = store.true_node();
            else if (children.empty())
                out[id] = store.false_node();
            else
                out[id] = store.add_or(std::move(children));
            break;
        }
        }
    }
    return out.at(root);
}

Reason make_reason(NnfStore& store, NodeId class_root, const Instantiation& x, bool general) {
    auto check = check_or_decomposable(store, class_root);
    if (!check.ok)
        throw UsageError("reason extraction needs an OR-decomposable class formula");
    if (!evaluate(store, class_root, x))
        throw UsageError("decision mismatch: the instance does not satisfy the class formula");
    Reason r;
    r.kind = general ? ReasonKind::General : ReasonKind::Complete;
    r.instance = x;
    r.class_root = class_root;
    r.root = filter_circuit(store, class_root, x, general);
    return r;
}

// Dense model table over the given variables, indexed by mixed-radix code in
// lexicographic order.
struct ModelTable {
    std::vector<int> vars;
    std::vector<int> cards;
    std::vector<char> sat;
    size_t space = 1;

    ModelTable(const NnfStore& store, NodeId root, const std::vector<int>& vars_in,
               const PrimeSettings& settings) {
        vars = vars_in;
        if (vars.size() > settings.max_vars)
            throw CapExceeded("prime computation variable cap exceeded");
        for (int v : vars) {
            size_t c = static_cast<size_t>(store.var(v).card());
            if (space > settings.enumeration_cap / c)
                throw CapExceeded("prime computation enumeration cap exceeded");
            space *= c;
            cards.push_back(static_cast<int>(c));
        }
        sat.resize(space);
        VarSet ids(vars.begin(), vars.end());
        size_t code = 0;
        for (InstantiationIter it(ids, cards); !it.done(); it.next(), ++code)
            sat[code] = evaluate(store, root, it.current()) ? 1 : 0;
    }

    // all instantiations consistent with per-variable state masks satisfy root
    bool term_implies(const std::vector<uint64_t>& masks) const {
        std::vector<std::vector<int>> allowed(vars.size());
        for (size_t i = 0; i < vars.size(); ++i)
            for (int s = 0; s < cards[i]; ++s)
                if ((masks[i] >> s) & 1) allowed[i].push_back(s);
        std::vector<size_t> idx(vars.size(), 0);
        for (;;) {
            size_t code = 0;
            for (size_t i = 0; i < vars.size(); ++i)
                code = code * static_cast<size_t>(cards[i]) +
                       static_cast<size_t>(allowed[i][idx[i]]);
            if (!sat[code]) return false;
            size_t i = vars.size();
            for (; i-- > 0;) {
                if (++idx[i] < allowed[i].size()) break;
                idx[i] = 0;
            }
            if (i == SIZE_MAX) return true;
        }
    }

    // every satisfying instantiation meets some literal of the clause
    bool clause_implied(const std::vector<uint64_t>& masks) const {
        std::vector<int> digits(vars.size(), 0);
        for (size_t code = 0; code < space; ++code) {
            if (sat[code]) {
                bool met = false;
                for (size_t i = 0; i < vars.size(); ++i)
                    if ((masks[i] >> digits[i]) & 1) met = true;
                if (!met) return false;
            }
            for (size_t i = vars.size(); i-- > 0;) {
                if (++digits[i] < cards[i]) break;
                digits[i] = 0;
            }
        }
        return true;
    }
};

TermOrClause to_member(const ModelTable& table, const std::vector<uint64_t>& masks,
                       const std::vector<uint64_t>& absent_value) {
    TermOrClause m;
    for (size_t i = 0; i < table.vars.size(); ++i)
        if (masks[i] != absent_value[i]) m.literals.push_back({table.vars[i], masks[i]});
    return m;
}

} // namespace

Reason complete_reason(NnfStore& store, NodeId class_root, const Instantiation& x) {
    return make_reason(store, class_root, x, false);
}

Reason general_reason(NnfStore& store, NodeId class_root, const Instantiation& x) {
    return make_reason(store, class_root, x, true);
}

TermSet prime_implicants(const NnfStore& store, NodeId root, const std::vector<int>& vars,
                         const PrimeSettings& settings) {
    ModelTable table(store, root, vars, settings);
    const size_t n = vars.size();
    std::vector<uint64_t> full(n);
    for (size_t i = 0; i < n; ++i) full[i] = (1ULL << table.cards[i]) - 1;

    TermSet primes;
    // odometer over per-variable non-empty state sets; full set = absent literal
    std::vector<uint64_t> masks = full;
    auto advance = [&]() -> bool {
        for (size_t i = n; i-- > 0;) {
            if (--masks[i] > 0) return true;
            masks[i] = full[i];
        }
        return false;
    };
    for (;;) {
        if (table.term_implies(masks)) {
            bool prime = true;
            for (size_t i = 0; i < n && prime; ++i) {
                for (int s = 0; s < table.cards[i] && prime; ++s) {
                    if ((masks[i] >> s) & 1) continue;
                    std::vector<uint64_t> widened = masks;
                    widened[i] |= 1ULL << s;
                    if (table.term_implies(widened)) prime = false;
                }
            }
            if (prime) primes.push_back(to_member(table, masks, full));
        }
        if (!advance()) break;
    }
    std::sort(primes.begin(), primes.end());
    return primes;
}

ClauseSet prime_implicates(const NnfStore& store, NodeId root, const std::vector<int>& vars,
                           const PrimeSettings& settings) {
    ModelTable table(store, root, vars, settings);
    const size_t n = vars.size();
    std::vector<uint64_t> full(n), absent(n, 0);
    for (size_t i = 0; i < n; ++i) full[i] = (1ULL << table.cards[i]) - 1;

    ClauseSet primes;
    // per-variable masks: 0 = absent, otherwise a non-empty proper subset
    std::vector<uint64_t> masks(n, 0);
    auto advance = [&]() -> bool {
        for (size_t i = n; i-- > 0;) {
            if (++masks[i] < full[i]) return true;
            masks[i] = 0;
        }
        return false;
    };
    for (;;) {
        if (table.clause_implied(masks)) {
            bool prime = true;
            for (size_t i = 0; i < n && prime; ++i) {
                for (int s = 0; s < table.cards[i] && prime; ++s) {
                    if (!((masks[i] >> s) & 1)) continue;
                    std::vector<uint64_t> shrunk = masks;
                    shrunk[i] &= ~(1ULL << s);
                    if (table.clause_implied(shrunk)) prime = false;
                }
            }
            if (prime) primes.push_back(to_member(table, masks, absent));
        }
        if (!advance()) break;
    }
    std::sort(primes.begin(), primes.end());
    return primes;
}

namespace {

std::vector<int> all_vars(const NnfStore& store) {
    std::vector<int> out(static_cast<size_t>(store.num_vars()));
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
    return out;
}

} // namespace

TermSet sufficient_reasons(NnfStore& store, NodeId class_root, const Instantiation& x,
                           const PrimeSettings& settings) {
    Reason r = complete_reason(store, class_root, x);
    return prime_implicants(store, r.root, all_vars(store), settings);
}

ClauseSet necessary_reasons(NnfStore& store, NodeId class_root, const Instantiation& x,
                            const PrimeSettings& settings) {
    Reason r = complete_reason(store, class_root, x);
    return prime_implicates(store, r.root, all_vars(store), settings);
}

TermSet gsr(NnfStore& store, NodeId class_root, const Instantiation& x,
            const PrimeSettings& settings) {
    Reason r = general_reason(store, class_root, x);
    return variable_minimal(prime_implicants(store, r.root, all_vars(store), settings));
}

ClauseSet gnr(NnfStore& store, NodeId class_root, const Instantiation& x,
              const PrimeSettings& settings) {
    Reason r = general_reason(store, class_root, x);
    return variable_minimal(prime_implicates(store, r.root, all_vars(store), settings));
}

ContrastiveResult contrastive(const ClassifierSpec& spec, const FTree& ft,
                              const Instantiation& x, int from_class, int to_class,
                              const PrimeSettings& settings,
                              const CompileSettings& compile_settings) {
    if (from_class == to_class)
        throw UsageError("contrastive query: the instance is already in the target class");
    int actual = classify(spec, x);
    if (actual != from_class)
        throw UsageError("contrastive query: instance is in class " + std::to_string(actual) +
                         ", not " + std::to_string(from_class));

    ContrastiveResult out;
    out.complement = compile_complement(spec, ft, to_class, compile_settings);
    for (VarId f : spec.features) {
        int idx = *out.complement.store.find_variable(spec.net.variable(f).name);
        out.store_instance.set(idx, x.at(f));
    }
    out.gnrs = gnr(out.complement.store, out.complement.root, out.store_instance, settings);
    return out;
}

std::string to_string(const NnfStore& store, const TermOrClause& member, bool is_term) {
    if (member.literals.empty()) return is_term ? "TRUE" : "FALSE";
    std::ostringstream out;
    for (size_t i = 0; i < member.literals.size(); ++i) {
        const MvLiteral& l = member.literals[i];
        if (i) out << (is_term ? " AND " : " OR ");
        out << store.var(l.var).name << " in {";
        bool first = true;
        for (int s = 0; s < store.var(l.var).card(); ++s)
            if ((l.states >> s) & 1) {
                if (!first) out << ',';
                out << store.var(l.var).states[static_cast<size_t>(s)];
                first = false;
            }
        out << '}';
    }
    return out.str();
}

} // namespace bnc
