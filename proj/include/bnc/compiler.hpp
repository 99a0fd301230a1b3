#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "bnc/bayesnet.hpp"
#include "bnc/ftree.hpp"
#include "bnc/nnf.hpp"

namespace bnc {

enum class Decision { Negative, Positive, Undecided };

struct CompileSettings {
    size_t enumeration_cap = size_t{1} << 22; // per-subtree instance count
    bool has_deadline = false;
    std::chrono::steady_clock::time_point deadline{};
};

struct CompileStats {
    long decide_hits = 0;       // non-nil decide verdicts
    long leaf_evaluations = 0;  // per-instance joint evaluations at the last leaf
    long recursive_calls = 0;
    long tie_count = 0;
    size_t node_count = 0;      // nodes reachable from the class-formula root
    int omega = 0, omega_r = 0, omega_l = 0, omega_t = 0;
    double wall_ms = 0.0;

    std::string to_record(const std::string& label) const; // one key=value line
};

/// Conditional instance table for one f-tree subtree: (v, P(v | S_pq)) pairs
/// in lexicographic v order.
struct SubtreeInstances {
    std::vector<std::pair<Instantiation, Factor>> items;
};

/// Per-compilation state: one per (class, f-tree) run, single-threaded.
struct CompileContext {
    const ClassifierSpec& spec;
    const FTree& ft;
    int class_index;
    bool positive_dual; // compile-positive variant (complement formulas)
    CompileSettings settings;

    NnfStore store;
    std::map<VarId, int> var_index; // net feature id -> store variable index
    std::map<int, SubtreeInstances> cache; // keyed by f-tree node
    CompileStats stats;
    std::vector<std::string> tie_log;

    CompileContext(const ClassifierSpec& s, const FTree& f, int cls, bool dual,
                   CompileSettings opts);
};

/// Theorem-1 test on M = P(Y, u, S). Undecided unless S avoids the features
/// and the target; otherwise reports whether u is negative/positive for the
/// class. Exact zero entries in a delta array are logged as ties.
Decision decide_negative(const Factor& M, const VarSet& S, int class_i, CompileContext& ctx);

/// All (v, P(v | S_pq)) pairs for the subtree of q; cached per node.
const SubtreeInstances& get_instances(CompileContext& ctx, int q);

/// The recursive compilation step; returns an NNF over V_q whose models are
/// exactly the subtree instantiations v making (u, v) negative for the class
/// (positive instead when the context runs the positive dual).
NodeId compile_negative(CompileContext& ctx, int q, const Factor& M);

struct CompileResult {
    NnfStore store;        // contains both circuits
    NodeId root = -1;      // OR-decomposable class formula
    NodeId pre_negation_root = -1; // AND-decomposable negative (or positive-dual) circuit
    CompileStats stats;
    std::vector<std::string> tie_log;

    /// Store variable indices in order (all features).
    std::vector<int> store_vars() const;
};

/// Compiles the class formula of class i: compile-negative from the f-tree
/// root, then negation. The result is checked OR-decomposable.
CompileResult compile_class_formula(const ClassifierSpec& spec, const FTree& ft, int class_i,
                                    const CompileSettings& settings = {});

/// Compiles the complement formula (models = instances not in class i) via
/// the positive dual.
CompileResult compile_complement(const ClassifierSpec& spec, const FTree& ft, int class_i,
                                 const CompileSettings& settings = {});

} // namespace bnc
