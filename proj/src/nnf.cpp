#include "bnc/nnf.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "bnc/errors.hpp"
#include "bnc/factor.hpp"

namespace bnc {

namespace {

// Dynamic bitset over store variables, sized once per traversal.
struct VarBits {
    std::vector<uint64_t> words;
    explicit VarBits(size_t nvars) : words((nvars + 63) / 64, 0) {}
    void set(int v) { words[static_cast<size_t>(v) >> 6] |= 1ULL << (v & 63); }
    bool intersects(const VarBits& o) const {
        for (size_t i = 0; i < words.size(); ++i)
            if (words[i] & o.words[i]) return true;
        return false;
    }
    void merge(const VarBits& o) {
        for (size_t i = 0; i < words.size(); ++i) words[i] |= o.words[i];
    }
};

DecomposabilityResult check_decomposable(const NnfStore& store, NodeId root, NodeKind gate) {
    std::vector<NodeId> order = store.reachable(root);
    std::map<NodeId, VarBits> vars;
    DecomposabilityResult res;
    for (NodeId id : order) {
        const NnfNode& n = store.node(id);
        VarBits bits(static_cast<size_t>(store.num_vars()));
        switch (n.kind) {
        case NodeKind::Literal:
            bits.set(n.var);
            break;
        case NodeKind::And:
        case NodeKind::Or:
            for (size_t i = 0; i < n.children.size(); ++i) {
                const VarBits& child = vars.at(n.children[i]);
                if (n.kind == gate && res.ok && bits.intersects(child)) {
                    res.ok = false;
                    res.violator = id;
                }
                bits.merge(child);
            }
            break;
        case NodeKind::True:
        case NodeKind::False:
            break;
        }
        vars.emplace(id, std::move(bits));
    }
    return res;
}

} // namespace

int NnfStore::add_variable(const std::string& name, std::vector<std::string> states) {
    if (states.size() < 2 || states.size() > 64)
        throw StructuralError("circuit variable '" + name + "' needs 2..64 states");
    if (find_variable(name))
        throw StructuralError("duplicate circuit variable '" + name + "'");
    Variable v;
    v.id = static_cast<VarId>(vars_.size());
    v.name = name;
    v.states = std::move(states);
    vars_.push_back(std::move(v));
    return static_cast<int>(vars_.size()) - 1;
}

std::optional<int> NnfStore::find_variable(const std::string& name) const {
    for (const Variable& v : vars_)
        if (v.name == name) return static_cast<int>(v.id);
    return std::nullopt;
}

NodeId NnfStore::add_literal(int var, uint64_t states) {
    if (var < 0 || var >= num_vars()) throw StructuralError("literal variable out of range");
    uint64_t full = full_mask(var);
    states &= full;
    if (states == 0) return false_node();
    if (states == full) return true_node();
    auto key = std::make_pair(var, states);
    auto it = literal_cache_.find(key);
    if (it != literal_cache_.end()) return it->second;
    NnfNode n;
    n.kind = NodeKind::Literal;
    n.var = var;
    n.states = states;
    nodes_.push_back(std::move(n));
    NodeId id = static_cast<NodeId>(nodes_.size()) - 1;
    literal_cache_[key] = id;
    return id;
}

NodeId NnfStore::add_and(std::vector<NodeId> children) {
    if (children.empty()) throw StructuralError("AND node needs at least one child");
    for (NodeId c : children)
        if (c < 0 || static_cast<size_t>(c) >= nodes_.size())
            throw StructuralError("AND child id out of range");
    if (children.size() == 1) return children[0];
    NnfNode n;
    n.kind = NodeKind::And;
    n.children = std::move(children);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size()) - 1;
}

NodeId NnfStore::add_or(std::vector<NodeId> children) {
    if (children.empty()) throw StructuralError("OR node needs at least one child");
    for (NodeId c : children)
        if (c < 0 || static_cast<size_t>(c) >= nodes_.size())
            throw StructuralError("OR child id out of range");
    if (children.size() == 1) return children[0];
    NnfNode n;
    n.kind = NodeKind::Or;
    n.children = std::move(children);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size()) - 1;
}

NodeId NnfStore::true_node() {
    if (true_id_ < 0) {
        nodes_.push_back(NnfNode{NodeKind::True, -1, 0, {}});
        true_id_ = static_cast<NodeId>(nodes_.size()) - 1;
    }
    return true_id_;
}

NodeId NnfStore::false_node() {
    if (false_id_ < 0) {
        nodes_.push_back(NnfNode{NodeKind::False, -1, 0, {}});
        false_id_ = static_cast<NodeId>(nodes_.size()) - 1;
    }
    return false_id_;
}

std::optional<NodeId> NnfStore::root(const std::string& name) const {
    auto it = roots_.find(name);
    if (it == roots_.end()) return std::nullopt;
    return it->second;
}

std::vector<NodeId> NnfStore::reachable(NodeId root) const {
    if (root < 0 || static_cast<size_t>(root) >= nodes_.size())
        throw StructuralError("root id out of range");
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<NodeId> stack{root};
    seen[static_cast<size_t>(root)] = true;
    while (!stack.empty()) {
        NodeId id = stack.back();
        stack.pop_back();
        for (NodeId c : nodes_[static_cast<size_t>(id)].children)
            if (!seen[static_cast<size_t>(c)]) {
                seen[static_cast<size_t>(c)] = true;
                stack.push_back(c);
            }
    }
    std::vector<NodeId> out;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (seen[i]) out.push_back(static_cast<NodeId>(i));
    return out;
}

DecomposabilityResult check_and_decomposable(const NnfStore& store, NodeId root) {
    return check_decomposable(store, root, NodeKind::And);
}

DecomposabilityResult check_or_decomposable(const NnfStore& store, NodeId root) {
    return check_decomposable(store, root, NodeKind::Or);
}

NodeId negate(NnfStore& store, NodeId root) {
    std::vector<NodeId> order = store.reachable(root);
    std::map<NodeId, NodeId> neg;
    for (NodeId id : order) {
        const NnfNode n = store.node(id); // copy: the arena may reallocate
        switch (n.kind) {
        case NodeKind::True:
            neg[id] = store.false_node();
            break;
        case NodeKind::False:
            neg[id] = store.true_node();
            break;
        case NodeKind::Literal:
            neg[id] = store.add_literal(n.var, store.full_mask(n.var) & ~n.states);
            break;
        case NodeKind::And: {
            std::vector<NodeId> children;
            children.reserve(n.children.size());
            for (NodeId c : n.children) children.push_back(neg.at(c));
            neg[id] = store.add_or(std::move(children));
            break;
        }
        case NodeKind::Or: {
            std::vector<NodeId> children;
            children.reserve(n.children.size());
            for (NodeId c : n.children) children.push_back(neg.at(c));
            neg[id] = store.add_and(std::move(children));
            break;
        }
        }
    }
    return neg.at(root);
}

bool evaluate(const NnfStore& store, NodeId root, const Instantiation& x) {
    std::vector<NodeId> order = store.reachable(root);
    std::map<NodeId, bool> val;
    for (NodeId id : order) {
        const NnfNode& n = store.node(id);
        switch (n.kind) {
        case NodeKind::True:
            val[id] = true;
            break;
        case NodeKind::False:
            val[id] = false;
            break;
        case NodeKind::Literal: {
            if (!x.contains(n.var))
                throw UsageError("instantiation does not assign circuit variable '" +
                                 store.var(n.var).name + "'");
            int s = x.at(n.var);
            if (s < 0 || s >= store.var(n.var).card())
                throw UsageError("state out of range for circuit variable '" +
                                 store.var(n.var).name + "'");
            val[id] = (n.states >> s) & 1;
            break;
        }
        case NodeKind::And: {
            bool v = true;
            for (NodeId c : n.children) v = v && val.at(c);
            val[id] = v;
            break;
        }
        case NodeKind::Or: {
            bool v = false;
            for (NodeId c : n.children) v = v || val.at(c);
            val[id] = v;
            break;
        }
        }
    }
    return val.at(root);
}

std::vector<Instantiation> enumerate_models(const NnfStore& store, NodeId root,
                                            const std::vector<int>& vars, size_t cap) {
    size_t space = 1;
    for (int v : vars) {
        size_t c = static_cast<size_t>(store.var(v).card());
        if (space > cap / c) throw CapExceeded("model enumeration space exceeds the cap");
        space *= c;
    }
    std::vector<int> cards;
    cards.reserve(vars.size());
    VarSet ids;
    for (int v : vars) {
        cards.push_back(store.var(v).card());
        ids.push_back(v);
    }
    std::vector<Instantiation> models;
    for (InstantiationIter it(ids, cards); !it.done(); it.next()) {
        Instantiation inst = it.current();
        if (evaluate(store, root, inst)) models.push_back(std::move(inst));
    }
    return models;
}

bool equivalent(const NnfStore& store, NodeId a, NodeId b, const std::vector<int>& vars,
                size_t cap) {
    size_t space = 1;
    for (int v : vars) {
        size_t c = static_cast<size_t>(store.var(v).card());
        if (space > cap / c) throw CapExceeded("equivalence check space exceeds the cap");
        space *= c;
    }
    std::vector<int> cards;
    VarSet ids;
    for (int v : vars) {
        cards.push_back(store.var(v).card());
        ids.push_back(v);
    }
    for (InstantiationIter it(ids, cards); !it.done(); it.next()) {
        Instantiation inst = it.current();
        if (evaluate(store, a, inst) != evaluate(store, b, inst)) return false;
    }
    return true;
}

size_t circuit_size(const NnfStore& store, NodeId root) {
    return store.reachable(root).size();
}

std::pair<NnfStore, NodeId> compact(const NnfStore& store, NodeId root) {
    NnfStore out;
    for (const Variable& v : store.vars()) out.add_variable(v.name, v.states);
    std::map<NodeId, NodeId> remap;
    for (NodeId id : store.reachable(root)) {
        const NnfNode& n = store.node(id);
        switch (n.kind) {
        case NodeKind::True:
            remap[id] = out.true_node();
            break;
        case NodeKind::False:
            remap[id] = out.false_node();
            break;
        case NodeKind::Literal:
            remap[id] = out.add_literal(n.var, n.states);
            break;
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<NodeId> children;
            children.reserve(n.children.size());
            for (NodeId c : n.children) children.push_back(remap.at(c));
            remap[id] = (n.kind == NodeKind::And) ? out.add_and(std::move(children))
                                                  : out.add_or(std::move(children));
            break;
        }
        }
    }
    return {std::move(out), remap.at(root)};
}

std::string write_circuit(const NnfStore& store, NodeId root) {
    if (root < 0 || static_cast<size_t>(root) >= store.num_nodes())
        throw StructuralError("write_circuit: root id out of range");
    std::ostringstream out;
    out << "mvnnf " << store.num_vars() << ' ' << store.num_nodes() << '\n';
    for (const Variable& v : store.vars()) {
        out << "v " << v.name << ' ' << v.card();
        for (const std::string& s : v.states) out << ' ' << s;
        out << '\n';
    }
    for (size_t i = 0; i < store.num_nodes(); ++i) {
        const NnfNode& n = store.node(static_cast<NodeId>(i));
        switch (n.kind) {
        case NodeKind::Literal: {
            out << "L " << n.var << ' ';
            bool first = true;
            for (int s = 0; s < store.var(n.var).card(); ++s)
                if ((n.states >> s) & 1) {
                    if (!first) out << ',';
                    out << s;
                    first = false;
                }
            out << '\n';
            break;
        }
        case NodeKind::And:
        case NodeKind::Or:
            out << (n.kind == NodeKind::And ? 'A' : 'O') << ' ' << n.children.size();
            for (NodeId c : n.children) out << ' ' << c;
            out << '\n';
            break;
        case NodeKind::True:
            out << "T\n";
            break;
        case NodeKind::False:
            out << "F\n";
            break;
        }
    }
    out << "root " << root << '\n';
    return out.str();
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

long parse_int(const std::string& tok, const char* what) {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw StructuralError(std::string("circuit file: bad ") + what + " '" + tok + "'");
    return v;
}

} // namespace

std::pair<NnfStore, NodeId> read_circuit(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw StructuralError("circuit file: empty input");
    auto header = tokenize(line);
    if (header.size() != 3 || header[0] != "mvnnf")
        throw StructuralError("circuit file: malformed header");
    long nvars = parse_int(header[1], "variable count");
    long nnodes = parse_int(header[2], "node count");
    if (nvars < 0 || nnodes < 0) throw StructuralError("circuit file: negative count");

    NnfStore store;
    for (long i = 0; i < nvars; ++i) {
        if (!std::getline(in, line)) throw StructuralError("circuit file: missing variable line");
        auto toks = tokenize(line);
        if (toks.size() < 4 || toks[0] != "v")
            throw StructuralError("circuit file: malformed variable line '" + line + "'");
        long k = parse_int(toks[2], "state count");
        if (k < 2 || k > 64 || toks.size() != static_cast<size_t>(3 + k))
            throw StructuralError("circuit file: state list mismatch for '" + toks[1] + "'");
        store.add_variable(toks[1], {toks.begin() + 3, toks.end()});
    }

    // Nodes are appended verbatim so positional ids survive a round trip.
    std::vector<NnfNode> raw;
    raw.reserve(static_cast<size_t>(nnodes));
    for (long i = 0; i < nnodes; ++i) {
        if (!std::getline(in, line)) throw StructuralError("circuit file: missing node line");
        auto toks = tokenize(line);
        if (toks.empty()) throw StructuralError("circuit file: empty node line");
        NnfNode n;
        if (toks[0] == "T") {
            if (toks.size() != 1) throw StructuralError("circuit file: malformed T line");
            n.kind = NodeKind::True;
        } else if (toks[0] == "F") {
            if (toks.size() != 1) throw StructuralError("circuit file: malformed F line");
            n.kind = NodeKind::False;
        } else if (toks[0] == "L") {
            if (toks.size() != 3) throw StructuralError("circuit file: malformed literal line");
            long var = parse_int(toks[1], "literal variable");
            if (var < 0 || var >= nvars)
                throw StructuralError("circuit file: literal variable out of range");
            n.kind = NodeKind::Literal;
            n.var = static_cast<int>(var);
            std::string states = toks[2];
            size_t pos = 0;
            while (pos < states.size()) {
                size_t comma = states.find(',', pos);
                if (comma == std::string::npos) comma = states.size();
                long s = parse_int(states.substr(pos, comma - pos), "state index");
                if (s < 0 || s >= store.var(n.var).card())
                    throw StructuralError("circuit file: state index out of range");
                n.states |= 1ULL << s;
                pos = comma + 1;
            }
            if (n.states == 0) throw StructuralError("circuit file: empty literal state set");
        } else if (toks[0] == "A" || toks[0] == "O") {
            if (toks.size() < 2) throw StructuralError("circuit file: malformed gate line");
            long cnt = parse_int(toks[1], "child count");
            if (cnt < 1 || toks.size() != static_cast<size_t>(2 + cnt))
                throw StructuralError("circuit file: child list mismatch");
            n.kind = (toks[0] == "A") ? NodeKind::And : NodeKind::Or;
            for (long c = 0; c < cnt; ++c) {
                long id = parse_int(toks[static_cast<size_t>(2 + c)], "child id");
                if (id < 0 || id >= i)
                    throw StructuralError("circuit file: child id " + std::to_string(id) +
                                          " is not an earlier node");
                n.children.push_back(static_cast<NodeId>(id));
            }
        } else {
            throw StructuralError("circuit file: unknown node tag '" + toks[0] + "'");
        }
        raw.push_back(std::move(n));
    }

    if (!std::getline(in, line)) throw StructuralError("circuit file: missing root line");
    auto roottoks = tokenize(line);
    if (roottoks.size() != 2 || roottoks[0] != "root")
        throw StructuralError("circuit file: malformed root line");
    long rootid = parse_int(roottoks[1], "root id");
    if (rootid < 0 || rootid >= nnodes)
        throw StructuralError("circuit file: root id out of range");

    store.append_raw(std::move(raw));
    return {std::move(store), static_cast<NodeId>(rootid)};
}

void NnfStore::append_raw(std::vector<NnfNode> nodes) {
    for (NnfNode& n : nodes) {
        NodeId id = static_cast<NodeId>(nodes_.size());
        if (n.kind == NodeKind::Literal)
            literal_cache_.emplace(std::make_pair(n.var, n.states), id);
        if (n.kind == NodeKind::True && true_id_ < 0) true_id_ = id;
        if (n.kind == NodeKind::False && false_id_ < 0) false_id_ = id;
        nodes_.push_back(std::move(n));
    }
}

} // namespace bnc
