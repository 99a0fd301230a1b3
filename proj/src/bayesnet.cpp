#include "bnc/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace bnc {

VarId BayesNet::add_variable(const std::string& name, std::vector<std::string> states) {
    if (finalized_) throw StructuralError("cannot add variables to a finalized network");
    if (states.size() < 2)
        throw StructuralError("variable '" + name + "' needs at least 2 states");
    std::set<std::string> uniq(states.begin(), states.end());
    if (uniq.size() != states.size())
        throw StructuralError("variable '" + name + "' has duplicate state names");
    if (find_variable(name))
        throw StructuralError("duplicate variable '" + name + "'");
    Variable v;
    v.id = static_cast<VarId>(variables_.size());
    v.name = name;
    v.states = std::move(states);
    variables_.push_back(std::move(v));
    parents_.emplace_back();
    cpts_.emplace_back(1.0);
    return variables_.back().id;
}

void BayesNet::set_cpt(VarId var, std::vector<VarId> parents, Factor cpt) {
    if (finalized_) throw StructuralError("cannot set CPTs on a finalized network");
    if (var < 0 || static_cast<size_t>(var) >= variables_.size())
        throw StructuralError("unknown variable id in set_cpt");
    VarSet family = make_sorted([&] {
        std::vector<VarId> f = parents;
        f.push_back(var);
        return f;
    }());
    if (family.size() != parents.size() + 1)
        throw StructuralError("duplicate parent for variable " + variable(var).name);
    if (cpt.scope() != family)
        throw StructuralError("CPT scope does not match the family of " + variable(var).name);
    for (size_t i = 0; i < family.size(); ++i)
        if (cpt.cards()[i] != card(family[i]))
            throw StructuralError("CPT cardinality mismatch for " + variable(var).name);
    parents_[static_cast<size_t>(var)] = std::move(parents);
    cpts_[static_cast<size_t>(var)] = std::move(cpt);
}

std::vector<std::string> BayesNet::finalize() {
    // acyclicity of the parent graph
    std::vector<int> indeg(variables_.size(), 0);
    std::vector<std::vector<VarId>> children(variables_.size());
    for (size_t v = 0; v < variables_.size(); ++v) {
        indeg[v] = static_cast<int>(parents_[v].size());
        for (VarId p : parents_[v]) {
            if (p < 0 || static_cast<size_t>(p) >= variables_.size())
                throw StructuralError("parent id out of range");
            children[static_cast<size_t>(p)].push_back(static_cast<VarId>(v));
        }
    }
    std::vector<VarId> order;
    for (size_t v = 0; v < variables_.size(); ++v)
        if (indeg[v] == 0) order.push_back(static_cast<VarId>(v));
    for (size_t i = 0; i < order.size(); ++i)
        for (VarId c : children[static_cast<size_t>(order[i])])
            if (--indeg[static_cast<size_t>(c)] == 0) order.push_back(c);
    if (order.size() != variables_.size())
        throw StructuralError("parent graph contains a cycle");

    // CPT row normalization: project the CPT to the parents and inspect sums
    std::vector<std::string> warnings;
    for (size_t v = 0; v < variables_.size(); ++v) {
        Factor& cpt = cpts_[v];
        if (cpt.scope() != family(static_cast<VarId>(v)))
            throw StructuralError("missing or mismatched CPT for '" + variables_[v].name + "'");
        VarSet parent_scope = set_difference(cpt.scope(), VarSet{static_cast<VarId>(v)});
        Factor row_sums = cpt.project(parent_scope);
        // rows within rounding noise of 1 pass through untouched, which keeps
        // serialize/parse round trips bit-exact
        bool renormalize = false;
        for (size_t r = 0; r < row_sums.size(); ++r) {
            double s = row_sums.values()[r];
            double err = std::fabs(s - 1.0);
            if (err <= 1e-12) continue;
            if (err > 1e-6)
                throw StructuralError("CPT row of '" + variables_[v].name + "' sums to " +
                                      std::to_string(s));
            renormalize = true;
            warnings.push_back("CPT row of '" + variables_[v].name + "' sums to " +
                               std::to_string(s) + "; renormalized");
        }
        if (renormalize) cpt = cpt.divide(row_sums);
    }
    finalized_ = true;
    return warnings;
}

std::optional<VarId> BayesNet::find_variable(const std::string& name) const {
    for (const Variable& v : variables_)
        if (v.name == name) return v.id;
    return std::nullopt;
}

std::vector<int> BayesNet::cards_of(const VarSet& vars) const {
    std::vector<int> out;
    out.reserve(vars.size());
    for (VarId v : vars) out.push_back(card(v));
    return out;
}

bool BayesNet::is_leaf(VarId v) const {
    for (size_t u = 0; u < variables_.size(); ++u)
        for (VarId p : parents_[u])
            if (p == v) return false;
    return true;
}

std::vector<VarId> BayesNet::leaves() const {
    std::vector<VarId> out;
    for (const Variable& v : variables_)
        if (is_leaf(v.id)) out.push_back(v.id);
    return out;
}

VarSet BayesNet::family(VarId v) const {
    std::vector<VarId> f = parents(v);
    f.push_back(v);
    return make_sorted(std::move(f));
}

void ClassifierSpec::validate() const {
    if (!net.finalized()) throw StructuralError("classifier network is not finalized");
    if (target < 0 || static_cast<size_t>(target) >= net.num_vars())
        throw StructuralError("unknown target variable");
    if (!net.is_root(target))
        throw StructuralError("classification target must be a root of the network");
    if (features.empty()) throw StructuralError("classifier needs at least one feature");
    for (VarId f : features) {
        if (f < 0 || static_cast<size_t>(f) >= net.num_vars())
            throw StructuralError("unknown feature variable");
        if (f == target) throw StructuralError("target cannot be a feature");
        if (!net.is_leaf(f))
            throw StructuralError("feature '" + net.variable(f).name + "' is not a leaf");
    }
    if (!std::is_sorted(features.begin(), features.end()))
        throw StructuralError("feature set must be sorted");
    if (mode == Mode::Threshold) {
        if (net.card(target) != 2)
            throw StructuralError("threshold mode requires a binary target");
        if (!(threshold > 0.0 && threshold < 1.0))
            throw StructuralError("threshold must lie strictly in (0,1)");
        if (threshold_class != 0 && threshold_class != 1)
            throw StructuralError("threshold class must be 0 or 1");
    }
}

namespace {

// Greedy minfill elimination over the interaction graph of the given factors,
// restricted to `eliminate` (ties broken by lowest variable id).
std::vector<VarId> ve_order(const std::vector<Factor>& factors, const std::set<VarId>& eliminate) {
    std::map<VarId, std::set<VarId>> adj;
    for (const Factor& f : factors)
        for (VarId a : f.scope())
            for (VarId b : f.scope())
                if (a != b) adj[a].insert(b);
    for (VarId v : eliminate) adj[v]; // isolated variables still need a slot

    std::vector<VarId> order;
    std::set<VarId> remaining = eliminate;
    while (!remaining.empty()) {
        VarId best = -1;
        long best_fill = -1;
        for (VarId v : remaining) {
            long fill = 0;
            const auto& nbrs = adj[v];
            for (auto it = nbrs.begin(); it != nbrs.end(); ++it)
                for (auto jt = std::next(it); jt != nbrs.end(); ++jt)
                    if (!adj[*it].count(*jt)) ++fill;
            if (best == -1 || fill < best_fill) {
                best = v;
                best_fill = fill;
            }
        }
        order.push_back(best);
        remaining.erase(best);
        auto nbrs = adj[best];
        for (VarId a : nbrs) {
            adj[a].erase(best);
            for (VarId b : nbrs)
                if (a != b) adj[a].insert(b);
        }
        adj.erase(best);
    }
    return order;
}

} // namespace

Factor joint_query(const BayesNet& net, const VarSet& targets, const Instantiation& evidence) {
    if (!net.finalized()) throw StructuralError("joint_query on a non-finalized network");
    for (VarId v : targets) {
        if (v < 0 || static_cast<size_t>(v) >= net.num_vars())
            throw StructuralError("joint_query target out of range");
        if (evidence.contains(v))
            throw StructuralError("joint_query targets and evidence must be disjoint");
    }
    for (const auto& [v, s] : evidence.assignments()) {
        if (v < 0 || static_cast<size_t>(v) >= net.num_vars())
            throw StructuralError("joint_query evidence variable out of range");
        if (s < 0 || s >= net.card(v))
            throw StructuralError("joint_query evidence state out of range");
    }

    std::vector<Factor> factors;
    factors.reserve(net.num_vars());
    for (size_t v = 0; v < net.num_vars(); ++v)
        factors.push_back(net.cpt(static_cast<VarId>(v)).reduce(evidence));

    std::set<VarId> eliminate;
    for (size_t v = 0; v < net.num_vars(); ++v) {
        VarId id = static_cast<VarId>(v);
        if (!set_contains(targets, id) && !evidence.contains(id)) eliminate.insert(id);
    }

    for (VarId v : ve_order(factors, eliminate)) {
        Factor bucket(1.0);
        std::vector<Factor> rest;
        rest.reserve(factors.size());
        for (Factor& f : factors) {
            if (set_contains(f.scope(), v))
                bucket = bucket.multiply(f);
            else
                rest.push_back(std::move(f));
        }
        rest.push_back(bucket.project(set_difference(bucket.scope(), VarSet{v})));
        factors = std::move(rest);
    }

    Factor result(1.0);
    for (const Factor& f : factors) result = result.multiply(f);
    return result.project(targets);
}

int decide_from_joint(const ClassifierSpec& spec, const std::vector<double>& joint_over_y,
                      bool* tie) {
    if (tie) *tie = false;
    if (spec.mode == Mode::Argmax) {
        int best = 0;
        for (size_t i = 1; i < joint_over_y.size(); ++i) {
            if (joint_over_y[i] > joint_over_y[best]) best = static_cast<int>(i);
        }
        if (tie) {
            for (size_t i = 0; i < joint_over_y.size(); ++i)
                if (static_cast<int>(i) != best && joint_over_y[i] == joint_over_y[best])
                    *tie = true;
        }
        return best;
    }
    // threshold mode: class i iff P(y_i|x) > t, strictly; equality goes to the
    // other class. Written without division: (1-t) P(y_i,x) - t P(y_j,x) > 0.
    int i = spec.threshold_class;
    int j = 1 - i;
    double delta = (1.0 - spec.threshold) * joint_over_y[static_cast<size_t>(i)] -
                   spec.threshold * joint_over_y[static_cast<size_t>(j)];
    if (tie && delta == 0.0) *tie = true;
    return delta > 0.0 ? i : j;
}

int classify(const ClassifierSpec& spec, const Instantiation& x) {
    spec.validate();
    for (VarId f : spec.features)
        if (!x.contains(f))
            throw UsageError("classify requires a full feature instantiation");
    Factor joint = joint_query(spec.net, VarSet{spec.target}, x);
    bool all_zero = true;
    for (double v : joint.values())
        if (v != 0.0) all_zero = false;
    if (all_zero)
        throw DegenerateInstance("instance has probability zero; classification undefined");
    return decide_from_joint(spec, joint.values());
}

} // namespace bnc
