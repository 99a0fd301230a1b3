#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bnc/errors.hpp"

namespace bnc {

using VarId = int32_t;
using VarSet = std::vector<VarId>; // always kept sorted ascending, no duplicates

/// A discrete variable: dense id, name, ordered state names (>= 2 states).
struct Variable {
    VarId id = -1;
    std::string name;
    std::vector<std::string> states;

    int card() const { return static_cast<int>(states.size()); }
};

/// Partial or full assignment of variables to state indices.
class Instantiation {
public:
    Instantiation() = default;

    void set(VarId var, int state) { assignments_[var] = state; }

    bool contains(VarId var) const { return assignments_.count(var) != 0; }

    int at(VarId var) const {
        auto it = assignments_.find(var);
        if (it == assignments_.end())
            throw UsageError("instantiation does not assign variable " + std::to_string(var));
        return it->second;
    }

    size_t size() const { return assignments_.size(); }
    bool empty() const { return assignments_.empty(); }

    const std::map<VarId, int>& assignments() const { return assignments_; }

    bool operator==(const Instantiation& other) const { return assignments_ == other.assignments_; }
    bool operator<(const Instantiation& other) const { return assignments_ < other.assignments_; }

private:
    std::map<VarId, int> assignments_;
};

// Sorted-set helpers for variable scopes.
VarSet set_union(const VarSet& a, const VarSet& b);
VarSet set_intersect(const VarSet& a, const VarSet& b);
VarSet set_difference(const VarSet& a, const VarSet& b);
bool set_contains(const VarSet& a, VarId v);
bool is_subset(const VarSet& sub, const VarSet& super);
VarSet make_sorted(std::vector<VarId> vars);

} // namespace bnc
