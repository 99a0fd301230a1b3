#include "bnc/compiler.hpp"

#include <algorithm>
#include <sstream>

namespace bnc {

std::string CompileStats::to_record(const std::string& label) const {
    std::ostringstream out;
    out << "record=" << label << " omega=" << omega << " omega_r=" << omega_r
        << " omega_l=" << omega_l << " omega_t=" << omega_t << " nodes=" << node_count
        << " decide_hits=" << decide_hits << " leaf_evals=" << leaf_evaluations
        << " calls=" << recursive_calls << " ties=" << tie_count << " time_ms=" << wall_ms;
    return out.str();
}

CompileContext::CompileContext(const ClassifierSpec& s, const FTree& f, int cls, bool dual,
                               CompileSettings opts)
    : spec(s), ft(f), class_index(cls), positive_dual(dual), settings(std::move(opts)) {
    if (cls < 0 || cls >= s.num_classes())
        throw StructuralError("class index out of range");
    for (VarId v : f.features) {
        const Variable& var = s.net.variable(v);
        var_index[v] = store.add_variable(var.name, var.states);
    }
}

namespace {

void check_deadline(const CompileContext& ctx) {
    if (ctx.settings.has_deadline && std::chrono::steady_clock::now() > ctx.settings.deadline)
        throw CapExceeded("compilation deadline exceeded");
}

// slice M (over {Y} + S) at Y = y, giving an array over S
std::vector<double> slice_class(const Factor& M, VarId y, int state) {
    Instantiation inst;
    inst.set(y, state);
    return M.reduce(inst).values();
}

// Adds the flat AND term for an instantiation; TRUE for the empty one.
NodeId make_term(CompileContext& ctx, const Instantiation& v, NodeId extra = -1) {
    std::vector<NodeId> children;
    for (const auto& [var, state] : v.assignments())
        children.push_back(ctx.store.add_literal(ctx.var_index.at(var), 1ULL << state));
    if (extra >= 0) children.push_back(extra);
    if (children.empty()) return ctx.store.true_node();
    return ctx.store.add_and(std::move(children));
}

} // namespace

Decision decide_negative(const Factor& M, const VarSet& S, int class_i, CompileContext& ctx) {
    VarSet blocked = set_union(ctx.ft.features, VarSet{ctx.ft.target});
    if (!set_intersect(S, blocked).empty()) return Decision::Undecided;

    const VarId y = ctx.ft.target;
    const int classes = ctx.spec.num_classes();

    auto log_tie = [&](int j, size_t entry) {
        ctx.tie_log.push_back("delta tie: class " + std::to_string(class_i) + " vs " +
                              std::to_string(j) + " at separator entry " + std::to_string(entry));
        ctx.stats.tie_count = static_cast<long>(ctx.tie_log.size());
    };

    if (ctx.spec.mode == Mode::Argmax) {
        std::vector<double> mi = slice_class(M, y, class_i);
        bool all_positive_every_j = true;
        for (int j = 0; j < classes; ++j) {
            if (j == class_i) continue;
            std::vector<double> mj = slice_class(M, y, j);
            bool non_positive = true, positive = true;
            for (size_t k = 0; k < mi.size(); ++k) {
                double d = mi[k] - mj[k];
                if (d == 0.0) log_tie(j, k);
                if (d > 0.0) non_positive = false;
                if (d <= 0.0) positive = false;
            }
            if (non_positive) return Decision::Negative;
            if (!positive) all_positive_every_j = false;
        }
        return all_positive_every_j ? Decision::Positive : Decision::Undecided;
    }

    // threshold mode: the designated class wins iff (1-t) P(y_d,.) - t P(y_o,.) > 0
    int designated = ctx.spec.threshold_class;
    std::vector<double> md = slice_class(M, y, designated);
    std::vector<double> mo = slice_class(M, y, 1 - designated);
    bool all_le = true, all_gt = true;
    for (size_t k = 0; k < md.size(); ++k) {
        double d = (1.0 - ctx.spec.threshold) * md[k] - ctx.spec.threshold * mo[k];
        if (d == 0.0) log_tie(1 - designated, k);
        if (d > 0.0) all_le = false;
        if (d <= 0.0) all_gt = false;
    }
    if (class_i == designated) {
        if (all_le) return Decision::Negative;
        if (all_gt) return Decision::Positive;
    } else {
        if (all_gt) return Decision::Negative;
        if (all_le) return Decision::Positive;
    }
    return Decision::Undecided;
}

const SubtreeInstances& get_instances(CompileContext& ctx, int q) {
    auto hit = ctx.cache.find(q);
    if (hit != ctx.cache.end()) return hit->second;
    check_deadline(ctx);

    const size_t qi = static_cast<size_t>(q);
    const VarSet& sep = ctx.ft.sep_parent[qi];
    const Factor& phi = ctx.ft.marginal[qi];
    Factor denom = phi.project(sep);

    SubtreeInstances out;
    if (ctx.ft.is_leaf(q)) {
        const VarSet& v_vars = ctx.ft.feats_below[qi];
        std::vector<int> cards = ctx.spec.net.cards_of(v_vars);
        size_t space = 1;
        for (int c : cards) {
            if (space > ctx.settings.enumeration_cap / static_cast<size_t>(c))
                throw CapExceeded("subtree instance enumeration exceeds the cap");
            space *= static_cast<size_t>(c);
        }
        for (InstantiationIter it(v_vars, cards); !it.done(); it.next()) {
            Instantiation v = it.current();
            Factor pr = phi.reduce(v).project(sep).divide(denom);
            out.items.emplace_back(std::move(v), std::move(pr));
        }
    } else {
        int l = ctx.ft.left[qi], r = ctx.ft.right[qi];
        // recursive calls insert into the node-keyed map; references stay valid
        const SubtreeInstances& right = get_instances(ctx, r);
        SubtreeInstances trivial;
        if (l < 0) trivial.items.emplace_back(Instantiation{}, Factor(1.0));
        const SubtreeInstances& left = (l >= 0) ? get_instances(ctx, l) : trivial;
        size_t space = left.items.size() * right.items.size();
        if (space > ctx.settings.enumeration_cap)
            throw CapExceeded("subtree instance enumeration exceeds the cap");
        for (const auto& [vl, prl] : left.items) {
            for (const auto& [vr, prr] : right.items) {
                Instantiation v = vl;
                for (const auto& [var, state] : vr.assignments()) v.set(var, state);
                Factor pr = phi.multiply(prl).multiply(prr).project(sep).divide(denom);
                out.items.emplace_back(std::move(v), std::move(pr));
            }
        }
        std::sort(out.items.begin(), out.items.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return ctx.cache.emplace(q, std::move(out)).first->second;
}

NodeId compile_negative(CompileContext& ctx, int q, const Factor& M) {
    ctx.stats.recursive_calls++;
    check_deadline(ctx);

    const size_t qi = static_cast<size_t>(q);
    const VarId y = ctx.ft.target;

    Decision d = decide_negative(M, ctx.ft.sep_parent[qi], ctx.class_index, ctx);
    if (d != Decision::Undecided) {
        ctx.stats.decide_hits++;
        bool negative = (d == Decision::Negative);
        if (ctx.positive_dual) negative = !negative;
        return negative ? ctx.store.true_node() : ctx.store.false_node();
    }

    std::vector<NodeId> gamma;
    if (ctx.ft.is_leaf(q)) {
        // sibling states of the innermost leaf variable merge into one
        // multi-valued literal per kept run
        const VarSet& v_vars = ctx.ft.feats_below[qi];
        VarId last = v_vars.empty() ? -1 : v_vars.back();
        Instantiation run_prefix;
        uint64_t run_mask = 0;
        bool have_run = false;
        auto flush = [&]() {
            if (!have_run || run_mask == 0) return;
            NodeId lit = ctx.store.add_literal(ctx.var_index.at(last), run_mask);
            if (ctx.store.node(lit).kind == NodeKind::True && run_prefix.empty())
                gamma.push_back(lit);
            else if (ctx.store.node(lit).kind == NodeKind::True)
                gamma.push_back(make_term(ctx, run_prefix));
            else
                gamma.push_back(make_term(ctx, run_prefix, lit));
        };
        for (const auto& [v, pr] : get_instances(ctx, q).items) {
            ctx.stats.leaf_evaluations++;
            std::vector<double> psi = M.multiply(pr).project({y}).values();
            bool tie = false;
            int chosen = decide_from_joint(ctx.spec, psi, &tie);
            if (tie) {
                ctx.tie_log.push_back("leaf decision tie at node " + std::to_string(q));
                ctx.stats.tie_count = static_cast<long>(ctx.tie_log.size());
            }
            bool keep = (chosen != ctx.class_index);
            if (ctx.positive_dual) keep = !keep;
            if (last < 0) {
                if (keep) gamma.push_back(ctx.store.true_node());
                continue;
            }
            Instantiation prefix = v;
            Instantiation reduced;
            for (const auto& [var, state] : v.assignments())
                if (var != last) reduced.set(var, state);
            prefix = std::move(reduced);
            if (!have_run || !(prefix == run_prefix)) {
                flush();
                run_prefix = prefix;
                run_mask = 0;
                have_run = true;
            }
            if (keep) run_mask |= 1ULL << v.at(last);
        }
        flush();
    } else {
        // replace the already counted separator marginal with the incoming
        // message so the product stays the joint P(cluster, Y, u)
        VarSet shared = set_intersect(set_union(ctx.ft.sep_parent[qi], VarSet{y}),
                                      ctx.ft.cluster[qi]);
        Factor base = ctx.ft.marginal[qi].multiply(
            M.divide(ctx.ft.marginal[qi].project(shared)));

        int r = ctx.ft.right[qi];
        int l = ctx.ft.left[qi];
        VarSet sep_qr = set_intersect(ctx.ft.cluster[qi],
                                      ctx.ft.cluster[static_cast<size_t>(r)]);
        VarSet keep = set_union(sep_qr, VarSet{y});

        SubtreeInstances trivial;
        if (l < 0) trivial.items.emplace_back(Instantiation{}, Factor(1.0));
        const SubtreeInstances& left = (l >= 0) ? get_instances(ctx, l) : trivial;

        for (const auto& [vl, prl] : left.items) {
            Factor m_qr = base.multiply(prl).project(keep);
            NodeId alpha = compile_negative(ctx, r, m_qr);
            const NnfNode& node = ctx.store.node(alpha);
            if (node.kind == NodeKind::False) continue;
            if (node.kind == NodeKind::True)
                gamma.push_back(make_term(ctx, vl));
            else
                gamma.push_back(make_term(ctx, vl, alpha));
        }
    }
    if (gamma.empty()) return ctx.store.false_node();
    return ctx.store.add_or(std::move(gamma));
}

namespace {

CompileResult run_compile(const ClassifierSpec& spec, const FTree& ft, int class_i,
                          const CompileSettings& settings, bool dual) {
    spec.validate();
    auto start = std::chrono::steady_clock::now();

    CompileContext ctx(spec, ft, class_i, dual, settings);
    Factor m0 = ft.marginal[static_cast<size_t>(ft.root)].project({ft.target});
    NodeId pre = compile_negative(ctx, ft.root, m0);
    NodeId formula = negate(ctx.store, pre);

    auto and_check = check_and_decomposable(ctx.store, pre);
    if (!and_check.ok)
        throw StructuralError("compiled circuit is not AND-decomposable at node " +
                              std::to_string(and_check.violator));
    auto or_check = check_or_decomposable(ctx.store, formula);
    if (!or_check.ok)
        throw StructuralError("class formula is not OR-decomposable at node " +
                              std::to_string(or_check.violator));

    CompilationWidthReport width = compilation_width(ft);
    CompileResult result;
    result.stats = ctx.stats;
    result.stats.omega = width.omega;
    result.stats.omega_r = width.omega_r;
    result.stats.omega_l = width.omega_l;
    result.stats.omega_t = width.omega_t;
    result.stats.node_count = circuit_size(ctx.store, formula);
    result.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    result.tie_log = std::move(ctx.tie_log);
    result.stats.tie_count = static_cast<long>(result.tie_log.size());
    result.store = std::move(ctx.store);
    result.root = formula;
    result.pre_negation_root = pre;
    return result;
}

} // namespace

std::vector<int> CompileResult::store_vars() const {
    std::vector<int> out(static_cast<size_t>(store.num_vars()));
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
    return out;
}

CompileResult compile_class_formula(const ClassifierSpec& spec, const FTree& ft, int class_i,
                                    const CompileSettings& settings) {
    return run_compile(spec, ft, class_i, settings, false);
}

CompileResult compile_complement(const ClassifierSpec& spec, const FTree& ft, int class_i,
                                 const CompileSettings& settings) {
    return run_compile(spec, ft, class_i, settings, true);
}

} // namespace bnc
