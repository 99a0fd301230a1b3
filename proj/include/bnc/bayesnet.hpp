#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bnc/factor.hpp"
#include "bnc/types.hpp"

namespace bnc {

/// Discrete Bayesian network: variables, per-variable parent lists, and one
/// CPT factor per variable over {var} + parents. Immutable after finalize().
class BayesNet {
public:
    BayesNet() = default;

    /// Adds a variable; returns its dense id (assigned contiguously from 0).
    VarId add_variable(const std::string& name, std::vector<std::string> states);

    /// Installs parents and the CPT for `var`. `values` follow the factor
    /// layout over the canonical sorted scope {var} + parents.
    void set_cpt(VarId var, std::vector<VarId> parents, Factor cpt);

    /// Validates acyclicity and CPT row normalization. Rows off by at most
    /// 1e-6 are renormalized; each such row produces a warning string.
    /// Throws StructuralError on anything worse.
    std::vector<std::string> finalize();

    bool finalized() const { return finalized_; }

    size_t num_vars() const { return variables_.size(); }
    const std::vector<Variable>& variables() const { return variables_; }
    const Variable& variable(VarId v) const { return variables_.at(static_cast<size_t>(v)); }
    const std::vector<VarId>& parents(VarId v) const { return parents_.at(static_cast<size_t>(v)); }
    const Factor& cpt(VarId v) const { return cpts_.at(static_cast<size_t>(v)); }

    std::optional<VarId> find_variable(const std::string& name) const;

    int card(VarId v) const { return variable(v).card(); }
    std::vector<int> cards_of(const VarSet& vars) const;

    bool is_root(VarId v) const { return parents(v).empty(); }
    bool is_leaf(VarId v) const;
    std::vector<VarId> leaves() const;

    /// Family of a variable: {var} + parents, sorted.
    VarSet family(VarId v) const;

private:
    std::vector<Variable> variables_;
    std::vector<std::vector<VarId>> parents_;
    std::vector<Factor> cpts_;
    bool finalized_ = false;
};

enum class Mode { Argmax, Threshold };

/// A Bayesian network classifier: network, root target Y, leaf features X,
/// and the decision rule.
struct ClassifierSpec {
    BayesNet net;
    VarId target = -1;
    VarSet features; // sorted
    Mode mode = Mode::Argmax;
    double threshold = 0.5; // Threshold mode only; must be in (0,1)
    int threshold_class = 0;

    int num_classes() const { return net.card(target); }
    void validate() const; // throws StructuralError on contract violations
};

/// Exact inference by variable elimination with a minfill order. Returns the
/// factor P(targets, evidence): the joint restricted to the evidence, with
/// scope `targets`. Targets and evidence must be disjoint.
Factor joint_query(const BayesNet& net, const VarSet& targets, const Instantiation& evidence);

/// Applies the decision rule to a full feature instantiation. Argmax ties go
/// to the lowest class index; a zero-probability instance raises
/// DegenerateInstance.
int classify(const ClassifierSpec& spec, const Instantiation& x);

/// Decision on an already computed joint P(Y, x); shared by classify and the
/// compiler's leaf test so both sides apply identical tie handling.
/// `tie` (optional) is set when an exact tie was broken.
int decide_from_joint(const ClassifierSpec& spec, const std::vector<double>& joint_over_y,
                      bool* tie = nullptr);

} // namespace bnc
