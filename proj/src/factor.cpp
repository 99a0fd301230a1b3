#include "bnc/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bnc {

Factor::Factor(VarSet scope, std::vector<int> cards, std::vector<double> values) {
    if (scope.size() != cards.size())
        throw StructuralError("factor scope/cards size mismatch");
    // canonicalize to sorted-by-id scope, permuting values accordingly
    std::vector<size_t> perm(scope.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](size_t a, size_t b) { return scope[a] < scope[b]; });
    for (size_t i = 0; i + 1 < perm.size(); ++i)
        if (scope[perm[i]] == scope[perm[i + 1]])
            throw StructuralError("duplicate variable in factor scope");

    bool sorted = std::is_sorted(scope.begin(), scope.end());
    scope_.resize(scope.size());
    cards_.resize(cards.size());
    for (size_t i = 0; i < perm.size(); ++i) {
        scope_[i] = scope[perm[i]];
        cards_[i] = cards[perm[i]];
    }
    size_t expect = 1;
    for (int c : cards_) {
        if (c < 1) throw StructuralError("factor variable cardinality < 1");
        expect *= static_cast<size_t>(c);
    }
    if (values.size() != expect)
        throw StructuralError("factor value count does not match scope cardinalities");

    if (sorted) {
        values_ = std::move(values);
    } else {
        // re-lay values from the original order to canonical order
        values_.resize(values.size());
        std::vector<size_t> orig_stride(scope.size());
        size_t s = 1;
        for (size_t i = scope.size(); i-- > 0;) {
            orig_stride[i] = s;
            s *= static_cast<size_t>(cards[i]);
        }
        std::vector<int> digits(scope_.size(), 0);
        for (size_t idx = 0; idx < values_.size(); ++idx) {
            size_t orig = 0;
            for (size_t i = 0; i < scope_.size(); ++i)
                orig += static_cast<size_t>(digits[i]) * orig_stride[perm[i]];
            values_[idx] = values[orig];
            for (size_t i = scope_.size(); i-- > 0;) {
                if (++digits[i] < cards_[i]) break;
                digits[i] = 0;
            }
        }
    }
    check_values();
}

void Factor::check_values() const {
    for (double v : values_) {
        if (std::isnan(v) || std::isinf(v))
            throw StructuralError("factor contains NaN or infinity");
        if (v < 0.0)
            throw StructuralError("factor contains a negative entry");
    }
}

int Factor::card_of(VarId v) const {
    auto it = std::lower_bound(scope_.begin(), scope_.end(), v);
    if (it == scope_.end() || *it != v)
        throw StructuralError("variable not in factor scope");
    return cards_[static_cast<size_t>(it - scope_.begin())];
}

size_t Factor::index_of(const Instantiation& inst) const {
    size_t idx = 0;
    for (size_t i = 0; i < scope_.size(); ++i) {
        int st = inst.at(scope_[i]);
        if (st < 0 || st >= cards_[i])
            throw StructuralError("state index out of range for variable " + std::to_string(scope_[i]));
        idx = idx * static_cast<size_t>(cards_[i]) + static_cast<size_t>(st);
    }
    return idx;
}

std::vector<int> Factor::decode(size_t index) const {
    std::vector<int> states(scope_.size());
    for (size_t i = scope_.size(); i-- > 0;) {
        states[i] = static_cast<int>(index % static_cast<size_t>(cards_[i]));
        index /= static_cast<size_t>(cards_[i]);
    }
    return states;
}

Factor Factor::multiply(const Factor& other) const {
    VarSet out_scope = set_union(scope_, other.scope_);
    std::vector<int> out_cards(out_scope.size());
    for (size_t i = 0; i < out_scope.size(); ++i) {
        VarId v = out_scope[i];
        bool in_a = set_contains(scope_, v);
        bool in_b = set_contains(other.scope_, v);
        int ca = in_a ? card_of(v) : -1;
        int cb = in_b ? other.card_of(v) : -1;
        if (in_a && in_b && ca != cb)
            throw StructuralError("cardinality mismatch for shared variable " + std::to_string(v));
        out_cards[i] = in_a ? ca : cb;
    }

    size_t out_size = 1;
    for (int c : out_cards) out_size *= static_cast<size_t>(c);

    // per-output-variable strides into each input (0 where absent)
    auto input_strides = [&](const Factor& f) {
        std::vector<size_t> st(out_scope.size(), 0);
        std::vector<size_t> own(f.scope_.size());
        size_t s = 1;
        for (size_t i = f.scope_.size(); i-- > 0;) {
            own[i] = s;
            s *= static_cast<size_t>(f.cards_[i]);
        }
        for (size_t i = 0; i < out_scope.size(); ++i) {
            auto it = std::lower_bound(f.scope_.begin(), f.scope_.end(), out_scope[i]);
            if (it != f.scope_.end() && *it == out_scope[i])
                st[i] = own[static_cast<size_t>(it - f.scope_.begin())];
        }
        return st;
    };
    std::vector<size_t> sa = input_strides(*this);
    std::vector<size_t> sb = input_strides(other);

    std::vector<double> out(out_size);
    std::vector<int> digits(out_scope.size(), 0);
    size_t ia = 0, ib = 0;
    for (size_t idx = 0; idx < out_size; ++idx) {
        out[idx] = values_[ia] * other.values_[ib];
        for (size_t i = out_scope.size(); i-- > 0;) {
            ++digits[i];
            ia += sa[i];
            ib += sb[i];
            if (digits[i] < out_cards[i]) break;
            ia -= static_cast<size_t>(out_cards[i]) * sa[i];
            ib -= static_cast<size_t>(out_cards[i]) * sb[i];
            digits[i] = 0;
        }
    }
    Factor result;
    result.scope_ = std::move(out_scope);
    result.cards_ = std::move(out_cards);
    result.values_ = std::move(out);
    return result;
}

Factor Factor::project(const VarSet& keep) const {
    if (!is_subset(keep, scope_))
        throw StructuralError("projection target is not a subset of the factor scope");
    if (keep.size() == scope_.size()) return *this;

    std::vector<int> keep_cards(keep.size());
    std::vector<size_t> keep_stride(scope_.size(), 0); // per source var, stride into output
    {
        std::vector<size_t> out_stride(keep.size());
        size_t s = 1;
        for (size_t i = keep.size(); i-- > 0;) {
            out_stride[i] = s;
            auto it = std::lower_bound(scope_.begin(), scope_.end(), keep[i]);
            keep_cards[i] = cards_[static_cast<size_t>(it - scope_.begin())];
            s *= static_cast<size_t>(keep_cards[i]);
        }
        for (size_t i = 0; i < scope_.size(); ++i) {
            auto it = std::lower_bound(keep.begin(), keep.end(), scope_[i]);
            if (it != keep.end() && *it == scope_[i])
                keep_stride[i] = out_stride[static_cast<size_t>(it - keep.begin())];
        }
    }

    size_t out_size = 1;
    for (int c : keep_cards) out_size *= static_cast<size_t>(c);
    std::vector<double> out(out_size, 0.0);

    std::vector<int> digits(scope_.size(), 0);
    size_t oidx = 0;
    for (size_t idx = 0; idx < values_.size(); ++idx) {
        out[oidx] += values_[idx];
        for (size_t i = scope_.size(); i-- > 0;) {
            ++digits[i];
            oidx += keep_stride[i];
            if (digits[i] < cards_[i]) break;
            oidx -= static_cast<size_t>(cards_[i]) * keep_stride[i];
            digits[i] = 0;
        }
    }
    Factor result;
    result.scope_ = keep;
    result.cards_ = std::move(keep_cards);
    result.values_ = std::move(out);
    return result;
}

Factor Factor::divide(const Factor& other) const {
    if (!is_subset(other.scope_, scope_))
        throw StructuralError("divisor scope is not a subset of the dividend scope");
    for (size_t i = 0; i < other.scope_.size(); ++i)
        if (card_of(other.scope_[i]) != other.cards_[i])
            throw StructuralError("cardinality mismatch in factor division");

    std::vector<size_t> bstride(scope_.size(), 0);
    {
        std::vector<size_t> own(other.scope_.size());
        size_t s = 1;
        for (size_t i = other.scope_.size(); i-- > 0;) {
            own[i] = s;
            s *= static_cast<size_t>(other.cards_[i]);
        }
        for (size_t i = 0; i < scope_.size(); ++i) {
            auto it = std::lower_bound(other.scope_.begin(), other.scope_.end(), scope_[i]);
            if (it != other.scope_.end() && *it == scope_[i])
                bstride[i] = own[static_cast<size_t>(it - other.scope_.begin())];
        }
    }

    std::vector<double> out(values_.size());
    std::vector<int> digits(scope_.size(), 0);
    size_t ib = 0;
    for (size_t idx = 0; idx < values_.size(); ++idx) {
        double num = values_[idx];
        double den = other.values_[ib];
        if (den == 0.0) {
            if (num == 0.0) {
                out[idx] = 0.0;
            } else {
                throw NumericalError("positive-by-zero factor division");
            }
        } else {
            out[idx] = num / den;
        }
        for (size_t i = scope_.size(); i-- > 0;) {
            ++digits[i];
            ib += bstride[i];
            if (digits[i] < cards_[i]) break;
            ib -= static_cast<size_t>(cards_[i]) * bstride[i];
            digits[i] = 0;
        }
    }
    Factor result;
    result.scope_ = scope_;
    result.cards_ = cards_;
    result.values_ = std::move(out);
    return result;
}

Factor Factor::reduce(const Instantiation& inst) const {
    VarSet remove;
    for (VarId v : scope_)
        if (inst.contains(v)) remove.push_back(v);
    if (remove.empty()) return *this;

    VarSet out_scope = set_difference(scope_, remove);
    std::vector<int> out_cards;
    out_cards.reserve(out_scope.size());
    for (VarId v : out_scope) out_cards.push_back(card_of(v));

    size_t out_size = 1;
    for (int c : out_cards) out_size *= static_cast<size_t>(c);

    std::vector<double> out(out_size);
    std::vector<int> digits(out_scope.size(), 0);
    for (size_t oidx = 0; oidx < out_size; ++oidx) {
        Instantiation probe = inst;
        for (size_t i = 0; i < out_scope.size(); ++i) probe.set(out_scope[i], digits[i]);
        out[oidx] = values_[index_of(probe)];
        for (size_t i = out_scope.size(); i-- > 0;) {
            if (++digits[i] < out_cards[i]) break;
            digits[i] = 0;
        }
    }
    Factor result;
    result.scope_ = std::move(out_scope);
    result.cards_ = std::move(out_cards);
    result.values_ = std::move(out);
    return result;
}

double Factor::sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

InstantiationIter::InstantiationIter(VarSet vars, std::vector<int> cards)
    : vars_(std::move(vars)), cards_(std::move(cards)), states_(vars_.size(), 0), total_(1),
      done_(false) {
    for (int c : cards_) total_ *= static_cast<size_t>(c);
}

void InstantiationIter::next() {
    for (size_t i = vars_.size(); i-- > 0;) {
        if (++states_[i] < cards_[i]) return;
        states_[i] = 0;
    }
    done_ = true;
}

Instantiation InstantiationIter::current() const {
    Instantiation inst;
    for (size_t i = 0; i < vars_.size(); ++i) inst.set(vars_[i], states_[i]);
    return inst;
}

} // namespace bnc
