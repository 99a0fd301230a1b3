#pragma once

#include <functional>
#include <vector>

#include "bnc/types.hpp"

namespace bnc {

/// Multidimensional table mapping instantiations of a variable set to
/// non-negative reals. The scope is canonical (sorted by variable id) and
/// values are stored row-major over that order, last variable fastest.
class Factor {
public:
    // Scalar factor over the empty scope.
    explicit Factor(double value = 1.0) : values_(1, value) { check_values(); }

    // scope/cards must be parallel; scope may arrive unsorted and is canonicalized.
    Factor(VarSet scope, std::vector<int> cards, std::vector<double> values);

    static Factor identity() { return Factor(1.0); }

    const VarSet& scope() const { return scope_; }
    const std::vector<int>& cards() const { return cards_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    size_t size() const { return values_.size(); }
    bool is_scalar() const { return scope_.empty(); }
    double scalar() const { return values_[0]; }

    int card_of(VarId v) const;

    /// Flat index of a (full-for-this-scope) instantiation.
    size_t index_of(const Instantiation& inst) const;
    double at(const Instantiation& inst) const { return values_[index_of(inst)]; }

    /// Decode a flat index back into state indices, parallel to scope().
    std::vector<int> decode(size_t index) const;

    Factor multiply(const Factor& other) const;
    Factor project(const VarSet& keep) const;

    /// Entrywise division; scope(other) must be a subset of scope(). 0/0 = 0,
    /// positive-by-zero raises NumericalError.
    Factor divide(const Factor& other) const;

    /// Slices out the variables assigned by inst (they leave the scope).
    /// Unassigned scope variables are kept; assignments outside the scope are ignored.
    Factor reduce(const Instantiation& inst) const;

    double sum() const;

private:
    void check_values() const;

    VarSet scope_;
    std::vector<int> cards_;
    std::vector<double> values_;
};

/// Iterates all instantiations of `vars` in lexicographic order by
/// (variable id, state index): first variable most significant.
class InstantiationIter {
public:
    InstantiationIter(VarSet vars, std::vector<int> cards);

    bool done() const { return done_; }
    void next();
    Instantiation current() const;
    const std::vector<int>& states() const { return states_; }
    size_t count() const { return total_; } // product of cardinalities

private:
    VarSet vars_;
    std::vector<int> cards_;
    std::vector<int> states_;
    size_t total_;
    bool done_;
};

} // namespace bnc
