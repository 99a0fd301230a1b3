#pragma once

#include <string>
#include <vector>

#include "bnc/compiler.hpp"
#include "bnc/nnf.hpp"

namespace bnc {

enum class ReasonKind { Complete, General };

/// A reason circuit for one decision: satisfied by the instance and implying
/// the class formula it explains.
struct Reason {
    NodeId root = -1;
    ReasonKind kind = ReasonKind::Complete;
    Instantiation instance;  // store variable indices
    NodeId class_root = -1;
};

/// Conjunction (term) or disjunction (clause) of multi-valued literals, at
/// most one literal per variable, sorted by variable.
struct TermOrClause {
    std::vector<MvLiteral> literals;

    bool operator==(const TermOrClause& o) const;
    bool operator<(const TermOrClause& o) const; // (size, var ids, state sets)
    std::vector<int> variables() const;
};
using Term = TermOrClause;
using Clause = TermOrClause;
using TermSet = std::vector<Term>;
using ClauseSet = std::vector<Clause>;

/// Weakest circuit over the instance's own literals implying the class
/// formula: literals retained as single-state, others dropped to FALSE.
/// Requires an OR-decomposable class formula satisfied by x.
Reason complete_reason(NnfStore& store, NodeId class_root, const Instantiation& x);

/// Weakest circuit over literals implied by the instance: literals whose
/// state set contains the instance state survive unchanged.
Reason general_reason(NnfStore& store, NodeId class_root, const Instantiation& x);

struct PrimeSettings {
    size_t max_vars = 12;
    size_t enumeration_cap = size_t{1} << 22;
};

/// All prime implicants (maximally weakened terms that still imply the root)
/// over the given store variables; exhaustive with memoized model tables.
TermSet prime_implicants(const NnfStore& store, NodeId root, const std::vector<int>& vars,
                         const PrimeSettings& settings = {});

/// All prime implicates (minimally strengthened clauses implied by the root).
ClauseSet prime_implicates(const NnfStore& store, NodeId root, const std::vector<int>& vars,
                           const PrimeSettings& settings = {});

/// Sufficient/necessary reasons: prime implicants/implicates of the complete
/// reason for the decision.
TermSet sufficient_reasons(NnfStore& store, NodeId class_root, const Instantiation& x,
                           const PrimeSettings& settings = {});
ClauseSet necessary_reasons(NnfStore& store, NodeId class_root, const Instantiation& x,
                            const PrimeSettings& settings = {});

/// Variable-minimal prime implicants/implicates of the general reason.
TermSet gsr(NnfStore& store, NodeId class_root, const Instantiation& x,
            const PrimeSettings& settings = {});
ClauseSet gnr(NnfStore& store, NodeId class_root, const Instantiation& x,
              const PrimeSettings& settings = {});

/// Removes members whose variable set strictly contains another member's.
template <typename Set>
Set variable_minimal(const Set& members) {
    Set out;
    for (const auto& m : members) {
        bool dominated = false;
        auto mv = m.variables();
        for (const auto& o : members) {
            auto ov = o.variables();
            if (ov.size() < mv.size() &&
                std::includes(mv.begin(), mv.end(), ov.begin(), ov.end()))
                dominated = true;
        }
        if (!dominated) out.push_back(m);
    }
    return out;
}

struct ContrastiveResult {
    CompileResult complement; // compiled formula for "not class k"
    ClauseSet gnrs;
    Instantiation store_instance;
};

/// Why is x (currently class `from_class`) not in class `to_class`: the GNRs
/// of the complement formula of to_class. Violating any returned clause in
/// any way moves the instance into to_class.
ContrastiveResult contrastive(const ClassifierSpec& spec, const FTree& ft,
                              const Instantiation& x, int from_class, int to_class,
                              const PrimeSettings& settings = {},
                              const CompileSettings& compile_settings = {});

/// "VAR in {state,...}" tokens joined by AND (terms) or OR (clauses).
std::string to_string(const NnfStore& store, const TermOrClause& member, bool is_term);

} // namespace bnc
