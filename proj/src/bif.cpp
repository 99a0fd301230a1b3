#include "bnc/bif.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace bnc {

std::vector<const ParseDiagnostic*> BifParseResult::errors() const {
    std::vector<const ParseDiagnostic*> out;
    for (const auto& d : diagnostics)
        if (d.severity == Severity::Error) out.push_back(&d);
    return out;
}

namespace {

struct Token {
    std::string text;
    int line = 0;
    bool is_punct = false;
};

// Comment-stripping tokenizer. Words are runs of characters that are not
// whitespace or punctuation; punctuation tokens are single characters from
// "{}()[]|,;". Robust against arbitrary byte input.
std::vector<Token> tokenize(const std::string& text, std::vector<ParseDiagnostic>& diags) {
    std::vector<Token> out;
    int line = 1;
    size_t i = 0;
    const size_t n = text.size();
    auto is_punct = [](char c) {
        return c == '{' || c == '}' || c == '(' || c == ')' || c == '[' || c == ']' ||
               c == '|' || c == ',' || c == ';';
    };
    while (i < n) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && text[i + 1] == '/') {
            while (i < n && text[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            size_t start_line = static_cast<size_t>(line);
            i += 2;
            bool closed = false;
            while (i < n) {
                if (text[i] == '\n') ++line;
                if (text[i] == '*' && i + 1 < n && text[i + 1] == '/') {
                    i += 2;
                    closed = true;
                    break;
                }
                ++i;
            }
            if (!closed)
                diags.push_back({Severity::Warning, static_cast<int>(start_line),
                                 "unterminated block comment"});
            continue;
        }
        if (is_punct(c)) {
            out.push_back({std::string(1, c), line, true});
            ++i;
            continue;
        }
        size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i])) &&
               !is_punct(text[i]) && text[i] != '\n' &&
               !(text[i] == '/' && i + 1 < n && (text[i + 1] == '/' || text[i + 1] == '*')))
            ++i;
        out.push_back({text.substr(start, i - start), line, false});
    }
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, BifParseResult& result)
        : toks_(std::move(tokens)), result_(result) {}

    // parse_* return true when the document is too broken to continue
    void run() {
        bool fatal = false;
        while (!at_end() && !fatal) {
            const Token& t = peek();
            if (t.text == "network") {
                fatal = parse_network();
            } else if (t.text == "variable") {
                fatal = parse_variable();
            } else if (t.text == "probability") {
                fatal = parse_probability();
            } else {
                error(t.line, "unexpected token '" + printable(t.text) + "'");
                advance();
                skip_block_if_any();
            }
        }
        finish();
    }

private:
    struct VarDecl {
        std::string name;
        std::vector<std::string> states;
        int line = 0;
    };
    struct CptDecl {
        std::string child;
        std::vector<std::string> parents;
        std::vector<double> values; // header order, child fastest
        int line = 0;
    };

    bool at_end() const { return pos_ >= toks_.size(); }
    const Token& peek() const { return toks_[pos_]; }
    const Token& advance() { return toks_[pos_++]; }
    int here() const { return at_end() ? (toks_.empty() ? 1 : toks_.back().line) : peek().line; }

    void error(int line, const std::string& msg) {
        result_.diagnostics.push_back({Severity::Error, line, msg});
    }
    void warning(int line, const std::string& msg) {
        result_.diagnostics.push_back({Severity::Warning, line, msg});
    }

    static std::string printable(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (std::isprint(static_cast<unsigned char>(c)))
                out += c;
            else
                out += '?';
        }
        return out.size() > 24 ? out.substr(0, 24) + "..." : out;
    }

    bool expect(const std::string& text, const char* what) {
        if (at_end() || peek().text != text) {
            error(here(), std::string("expected '") + text + "' " + what);
            return false;
        }
        advance();
        return true;
    }

    // Skips a balanced { ... } block if one starts here (error recovery).
    void skip_block_if_any() {
        while (!at_end() && peek().text != "{" && peek().text != "network" &&
               peek().text != "variable" && peek().text != "probability")
            advance();
        if (at_end() || peek().text != "{") return;
        int depth = 0;
        while (!at_end()) {
            const Token& t = advance();
            if (t.text == "{") ++depth;
            if (t.text == "}" && --depth == 0) return;
        }
    }

    // property lines are preserved verbatim up to the closing ';'
    void parse_property(std::vector<std::string>& sink) {
        int line = peek().line;
        advance(); // 'property'
        std::string body;
        while (!at_end() && peek().text != ";") {
            if (!body.empty()) body += ' ';
            body += advance().text;
        }
        if (at_end()) {
            error(line, "unterminated property");
            return;
        }
        advance(); // ';'
        sink.push_back(body);
    }

    bool parse_network() {
        advance();
        if (!at_end() && !peek().is_punct) result_.network_name = advance().text;
        if (!expect("{", "after network header")) return true;
        while (!at_end() && peek().text != "}") {
            if (peek().text == "property") {
                parse_property(result_.properties[""]);
            } else {
                warning(peek().line, "ignoring token '" + printable(peek().text) +
                                         "' in network block");
                advance();
            }
        }
        return !expect("}", "closing network block");
    }

    bool parse_variable() {
        int line = peek().line;
        advance();
        if (at_end() || peek().is_punct) {
            error(here(), "variable block without a name");
            skip_block_if_any();
            return true;
        }
        VarDecl decl;
        decl.name = advance().text;
        decl.line = line;
        if (!expect("{", "after variable name")) return true;
        bool have_type = false;
        while (!at_end() && peek().text != "}") {
            if (peek().text == "property") {
                parse_property(result_.properties[decl.name]);
                continue;
            }
            if (peek().text != "type") {
                warning(peek().line,
                        "ignoring token '" + printable(peek().text) + "' in variable block");
                advance();
                continue;
            }
            advance(); // 'type'
            if (at_end() || peek().text != "discrete") {
                error(here(), "variable '" + decl.name + "' is not discrete");
                skip_to_semicolon();
                continue;
            }
            advance();
            long declared = -1;
            if (!expect("[", "in type clause")) return true;
            if (!at_end() && !peek().is_punct) {
                declared = to_long(advance().text, -1);
            }
            if (!expect("]", "in type clause")) return true;
            if (!expect("{", "before state list")) return true;
            while (!at_end() && peek().text != "}") {
                if (peek().text == ",") {
                    advance();
                    continue;
                }
                decl.states.push_back(advance().text);
            }
            if (!expect("}", "closing state list")) return true;
            if (!at_end() && peek().text == ";") advance();
            if (declared >= 0 && declared != static_cast<long>(decl.states.size()))
                error(line, "variable '" + decl.name + "' declares " + std::to_string(declared) +
                                " states but lists " + std::to_string(decl.states.size()));
            have_type = true;
        }
        if (!expect("}", "closing variable block")) return true;
        if (!have_type) {
            error(line, "variable '" + decl.name + "' has no discrete type clause");
            return false;
        }
        if (decl.states.size() < 2) {
            error(line, "variable '" + decl.name + "' needs at least 2 states");
            return false;
        }
        std::set<std::string> uniq(decl.states.begin(), decl.states.end());
        if (uniq.size() != decl.states.size()) {
            error(line, "variable '" + decl.name + "' has duplicate state names");
            return false;
        }
        for (const VarDecl& v : vars_)
            if (v.name == decl.name) {
                error(line, "duplicate variable '" + decl.name + "'");
                return false;
            }
        vars_.push_back(std::move(decl));
        return false;
    }

    void skip_to_semicolon() {
        while (!at_end() && peek().text != ";" && peek().text != "}") advance();
        if (!at_end() && peek().text == ";") advance();
    }

    long to_long(const std::string& s, long fallback) {
        long v = fallback;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) return fallback;
        return v;
    }

    std::optional<double> to_double(const std::string& s) {
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
        return v;
    }

    const VarDecl* find_var(const std::string& name) const {
        for (const VarDecl& v : vars_)
            if (v.name == name) return &v;
        return nullptr;
    }

    bool parse_probability() {
        int line = peek().line;
        advance();
        if (!expect("(", "after probability")) return true;
        CptDecl decl;
        decl.line = line;
        if (at_end() || peek().is_punct) {
            error(here(), "probability block without a child variable");
            skip_block_if_any();
            return true;
        }
        decl.child = advance().text;
        if (!at_end() && peek().text == "|") {
            advance();
            while (!at_end() && peek().text != ")") {
                if (peek().text == ",") {
                    advance();
                    continue;
                }
                decl.parents.push_back(advance().text);
            }
        }
        if (!expect(")", "closing probability header")) return true;

        const VarDecl* child = find_var(decl.child);
        if (!child) {
            error(line, "probability block for undeclared variable '" + decl.child + "'");
            skip_block_if_any();
            return false;
        }
        std::vector<const VarDecl*> parents;
        for (const std::string& p : decl.parents) {
            const VarDecl* pv = find_var(p);
            if (!pv) {
                error(line, "undeclared parent '" + p + "' in probability block for '" +
                                decl.child + "'");
                skip_block_if_any();
                return false;
            }
            parents.push_back(pv);
        }
        size_t rows = 1;
        for (const VarDecl* p : parents) rows *= p->states.size();
        size_t expect_values = rows * child->states.size();
        decl.values.assign(expect_values, std::nan(""));

        if (!expect("{", "opening probability block")) return true;
        bool bad = false;
        while (!at_end() && peek().text != "}") {
            if (peek().text == "property") {
                parse_property(result_.properties[decl.child]);
                continue;
            }
            if (peek().text == "table") {
                int tline = peek().line;
                advance();
                std::vector<double> vals;
                while (!at_end() && peek().text != ";" && peek().text != "}") {
                    if (peek().text == ",") {
                        advance();
                        continue;
                    }
                    auto v = to_double(peek().text);
                    if (!v) {
                        error(peek().line, "bad number '" + printable(peek().text) + "' in table");
                        bad = true;
                    } else {
                        vals.push_back(*v);
                    }
                    advance();
                }
                if (!at_end() && peek().text == ";") advance();
                if (vals.size() != expect_values) {
                    error(tline, "table for '" + decl.child + "' has " +
                                     std::to_string(vals.size()) + " values, expected " +
                                     std::to_string(expect_values));
                    bad = true;
                } else if (!bad) {
                    decl.values = std::move(vals);
                }
                continue;
            }
            if (peek().text == "(") {
                int rline = peek().line;
                advance();
                std::vector<std::string> states;
                while (!at_end() && peek().text != ")") {
                    if (peek().text == ",") {
                        advance();
                        continue;
                    }
                    states.push_back(advance().text);
                }
                if (!expect(")", "closing parent state list")) return true;
                if (states.size() != parents.size()) {
                    error(rline, "row in '" + decl.child + "' lists " +
                                     std::to_string(states.size()) + " parent states, expected " +
                                     std::to_string(parents.size()));
                    bad = true;
                    skip_to_semicolon();
                    continue;
                }
                size_t row = 0;
                bool row_ok = true;
                for (size_t i = 0; i < parents.size(); ++i) {
                    auto it = std::find(parents[i]->states.begin(), parents[i]->states.end(),
                                        states[i]);
                    if (it == parents[i]->states.end()) {
                        error(rline, "unknown state '" + printable(states[i]) + "' of parent '" +
                                         parents[i]->name + "'");
                        row_ok = false;
                        break;
                    }
                    row = row * parents[i]->states.size() +
                          static_cast<size_t>(it - parents[i]->states.begin());
                }
                std::vector<double> vals;
                while (!at_end() && peek().text != ";" && peek().text != "}") {
                    if (peek().text == ",") {
                        advance();
                        continue;
                    }
                    auto v = to_double(peek().text);
                    if (!v) {
                        error(peek().line, "bad number '" + printable(peek().text) + "' in row");
                        row_ok = false;
                    } else {
                        vals.push_back(*v);
                    }
                    advance();
                }
                if (!at_end() && peek().text == ";") advance();
                if (!row_ok) {
                    bad = true;
                    continue;
                }
                if (vals.size() != child->states.size()) {
                    error(rline, "row for '" + decl.child + "' has " +
                                     std::to_string(vals.size()) + " values, expected " +
                                     std::to_string(child->states.size()));
                    bad = true;
                    continue;
                }
                size_t base = row * child->states.size();
                if (!std::isnan(decl.values[base])) {
                    error(rline, "duplicate row in probability block for '" + decl.child + "'");
                    bad = true;
                    continue;
                }
                for (size_t i = 0; i < vals.size(); ++i) decl.values[base + i] = vals[i];
                continue;
            }
            warning(peek().line,
                    "ignoring token '" + printable(peek().text) + "' in probability block");
            advance();
        }
        if (!expect("}", "closing probability block")) return true;

        for (double v : decl.values)
            if (std::isnan(v)) {
                error(line, "probability block for '" + decl.child + "' is incomplete");
                bad = true;
                break;
            }
        if (bad) return false;
        for (const CptDecl& c : cpts_)
            if (c.child == decl.child) {
                error(line, "duplicate probability block for '" + decl.child + "'");
                return false;
            }
        cpts_.push_back(std::move(decl));
        return false;
    }

    void finish() {
        if (!result_.errors().empty()) return;

        BayesNet net;
        for (const VarDecl& v : vars_) net.add_variable(v.name, v.states);
        std::set<std::string> with_cpt;
        for (const CptDecl& c : cpts_) {
            VarId child = *net.find_variable(c.child);
            std::vector<VarId> parents;
            for (const std::string& p : c.parents) parents.push_back(*net.find_variable(p));
            // header order (parents..., child fastest) -> canonical factor
            VarSet header_scope;
            std::vector<int> header_cards;
            for (VarId p : parents) {
                header_scope.push_back(p);
                header_cards.push_back(net.card(p));
            }
            header_scope.push_back(child);
            header_cards.push_back(net.card(child));
            try {
                Factor cpt(header_scope, header_cards, c.values);
                net.set_cpt(child, parents, std::move(cpt));
                with_cpt.insert(c.child);
            } catch (const StructuralError& e) {
                result_.diagnostics.push_back({Severity::Error, c.line, e.what()});
                return;
            }
        }
        for (const VarDecl& v : vars_)
            if (!with_cpt.count(v.name)) {
                result_.diagnostics.push_back(
                    {Severity::Error, v.line, "variable '" + v.name + "' has no CPT"});
                return;
            }
        try {
            for (std::string& w : net.finalize())
                result_.diagnostics.push_back({Severity::Warning, 0, std::move(w)});
        } catch (const StructuralError& e) {
            result_.diagnostics.push_back({Severity::Error, 0, e.what()});
            return;
        }
        result_.net = std::move(net);
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    BifParseResult& result_;
    std::vector<VarDecl> vars_;
    std::vector<CptDecl> cpts_;
};

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

} // namespace

BifParseResult parse_bif(const std::string& text) {
    BifParseResult result;
    Parser parser(tokenize(text, result.diagnostics), result);
    parser.run();
    if (!result.errors().empty()) result.net.reset();
    return result;
}

std::string serialize_bif(const BayesNet& net, const std::string& network_name,
                          const BifProperties& properties) {
    std::ostringstream out;
    out << "network " << (network_name.empty() ? "net" : network_name) << " {\n";
    if (auto it = properties.find(""); it != properties.end())
        for (const std::string& p : it->second) out << "  property " << p << " ;\n";
    out << "}\n";
    for (const Variable& v : net.variables()) {
        out << "variable " << v.name << " {\n";
        out << "  type discrete [ " << v.card() << " ] { ";
        for (int s = 0; s < v.card(); ++s) out << (s ? ", " : "") << v.states[static_cast<size_t>(s)];
        out << " };\n";
        if (auto it = properties.find(v.name); it != properties.end())
            for (const std::string& p : it->second) out << "  property " << p << " ;\n";
        out << "}\n";
    }
    for (const Variable& v : net.variables()) {
        const std::vector<VarId>& parents = net.parents(v.id);
        out << "probability ( " << v.name;
        if (!parents.empty()) {
            out << " | ";
            for (size_t i = 0; i < parents.size(); ++i)
                out << (i ? ", " : "") << net.variable(parents[i]).name;
        }
        out << " ) {\n";
        const Factor& cpt = net.cpt(v.id);
        if (parents.empty()) {
            out << "  table ";
            Instantiation inst;
            for (int s = 0; s < v.card(); ++s) {
                inst.set(v.id, s);
                out << (s ? ", " : "") << format_double(cpt.at(inst));
            }
            out << ";\n";
        } else {
            VarSet pscope;
            std::vector<int> pcards;
            for (VarId p : parents) {
                pscope.push_back(p);
                pcards.push_back(net.card(p));
            }
            for (InstantiationIter it(pscope, pcards); !it.done(); it.next()) {
                Instantiation inst = it.current();
                out << "  (";
                for (size_t i = 0; i < parents.size(); ++i) {
                    // iterate in header (declaration) order, not sorted order
                    const Variable& pv = net.variable(parents[i]);
                    out << (i ? ", " : "") << pv.states[static_cast<size_t>(inst.at(parents[i]))];
                }
                out << ") ";
                for (int s = 0; s < v.card(); ++s) {
                    inst.set(v.id, s);
                    out << (s ? ", " : "") << format_double(cpt.at(inst));
                }
                out << ";\n";
            }
        }
        out << "}\n";
    }
    return out.str();
}

} // namespace bnc
