#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnc/types.hpp"

namespace bnc {

using NodeId = int32_t;

enum class NodeKind : uint8_t { Literal, And, Or, True, False };

/// Multi-valued literal: variable restricted to a non-empty set of states.
/// State sets are bitmasks; variables may have at most 64 states.
struct MvLiteral {
    int var = -1;       // index into the store's variable table
    uint64_t states = 0;
};

struct NnfNode {
    NodeKind kind;
    int var = -1;          // Literal only
    uint64_t states = 0;   // Literal only
    std::vector<NodeId> children; // And/Or only, non-empty
};

struct DecomposabilityResult {
    bool ok = true;
    NodeId violator = -1;
};

/// Append-only arena of NNF nodes over a self-contained variable table.
/// Children always precede parents. Literals are canonicalized: a full-domain
/// state set becomes TRUE, an empty one FALSE, and identical literals share
/// one node.
class NnfStore {
public:
    /// Declares a variable; returns its index in the table.
    int add_variable(const std::string& name, std::vector<std::string> states);

    int num_vars() const { return static_cast<int>(vars_.size()); }
    const Variable& var(int i) const { return vars_.at(static_cast<size_t>(i)); }
    const std::vector<Variable>& vars() const { return vars_; }
    std::optional<int> find_variable(const std::string& name) const;
    uint64_t full_mask(int var) const { return (vars_.at(static_cast<size_t>(var)).card() == 64)
                                                   ? ~0ULL
                                                   : (1ULL << vars_.at(static_cast<size_t>(var)).card()) - 1; }

    NodeId add_literal(int var, uint64_t states);
    NodeId add_and(std::vector<NodeId> children); // singleton collapses to the child
    NodeId add_or(std::vector<NodeId> children);
    NodeId true_node();
    NodeId false_node();

    size_t num_nodes() const { return nodes_.size(); }
    const NnfNode& node(NodeId id) const { return nodes_.at(static_cast<size_t>(id)); }

    void set_root(const std::string& name, NodeId id) { roots_[name] = id; }
    std::optional<NodeId> root(const std::string& name) const;

    /// Verbatim append used by the circuit reader; positional ids must survive
    /// a round trip, so no canonicalization is applied.
    void append_raw(std::vector<NnfNode> nodes);

    /// Nodes reachable from `root` (ascending ids).
    std::vector<NodeId> reachable(NodeId root) const;

private:
    std::vector<Variable> vars_;
    std::vector<NnfNode> nodes_;
    std::map<std::string, NodeId> roots_;
    std::map<std::pair<int, uint64_t>, NodeId> literal_cache_;
    NodeId true_id_ = -1;
    NodeId false_id_ = -1;
};

DecomposabilityResult check_and_decomposable(const NnfStore& store, NodeId root);
DecomposabilityResult check_or_decomposable(const NnfStore& store, NodeId root);

/// De Morgan negation; appends the negated circuit and returns its root.
NodeId negate(NnfStore& store, NodeId root);

/// Standard NNF semantics. The instantiation (keyed by store variable index)
/// must assign every variable mentioned under the root.
bool evaluate(const NnfStore& store, NodeId root, const Instantiation& x);

/// All models over `vars` (store variable indices, sorted), lexicographic by
/// (variable, state). Throws CapExceeded when the space exceeds `cap`.
std::vector<Instantiation> enumerate_models(const NnfStore& store, NodeId root,
                                            const std::vector<int>& vars,
                                            size_t cap = size_t{1} << 22);

bool equivalent(const NnfStore& store, NodeId a, NodeId b, const std::vector<int>& vars,
                size_t cap = size_t{1} << 22);

/// Number of nodes reachable from the root.
size_t circuit_size(const NnfStore& store, NodeId root);

/// Copies the reachable part of a circuit into a fresh store (ids renumbered,
/// topological order preserved).
std::pair<NnfStore, NodeId> compact(const NnfStore& store, NodeId root);

/// Line-based circuit file format:
///   mvnnf <num_vars> <num_nodes>
///   v <name> <k> <state0> ... <state{k-1}>      (one line per variable)
///   L <var_index> <s1,s2,...> | A <n> <id...> | O <n> <id...> | T | F
///   root <id>
/// Node ids are 0-based positions among the node lines; children must precede
/// parents.
std::string write_circuit(const NnfStore& store, NodeId root);
std::pair<NnfStore, NodeId> read_circuit(const std::string& text);

} // namespace bnc
