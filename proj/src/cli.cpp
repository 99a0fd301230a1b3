#include "bnc/cli.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "bnc/bif.hpp"
#include "bnc/compiler.hpp"
#include "bnc/explain.hpp"
#include "bnc/fixtures.hpp"
#include "bnc/jointree.hpp"
#include "bnc/verify.hpp"

namespace bnc {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitProblem = 2;
constexpr int kExitCap = 3;
constexpr int kExitNotPositive = 4;

struct ProblemSpec {
    std::string net_path;
    std::string target;
    std::vector<std::string> features; // empty + all_leaves
    bool all_leaves = false;
    std::string class_label;           // name or index
    std::string mode = "argmax";       // argmax | threshold:<t> | threshold-avg
    uint64_t seed = 0;
};

struct Problem {
    BayesNet net;
    ClassifierSpec spec;
    int class_index = 0;
};

double average_posterior(const ClassifierSpec& spec, int class_i, size_t cap) {
    std::vector<int> cards = spec.net.cards_of(spec.features);
    size_t space = 1;
    for (int c : cards) {
        if (space > cap / static_cast<size_t>(c))
            throw CapExceeded("threshold-avg instance space exceeds the cap");
        space *= static_cast<size_t>(c);
    }
    double total = 0.0;
    for (InstantiationIter it(spec.features, cards); !it.done(); it.next()) {
        Factor joint = joint_query(spec.net, {spec.target}, it.current());
        double z = joint.sum();
        if (z > 0.0) total += joint.values()[static_cast<size_t>(class_i)] / z;
    }
    return total / static_cast<double>(space);
}

Problem load_problem(const ProblemSpec& ps) {
    std::ifstream in(ps.net_path);
    if (!in) throw StructuralError("cannot open network file '" + ps.net_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    BifParseResult parsed = parse_bif(buf.str());
    if (!parsed.ok()) {
        std::string msg = "network parse failed:";
        for (const auto* e : parsed.errors())
            msg += "\n  line " + std::to_string(e->line) + ": " + e->message;
        throw StructuralError(msg);
    }

    Problem p;
    p.net = std::move(*parsed.net);
    auto target = p.net.find_variable(ps.target);
    if (!target) throw StructuralError("unknown target variable '" + ps.target + "'");
    p.spec.net = p.net;
    p.spec.target = *target;

    if (ps.all_leaves) {
        for (VarId leaf : p.net.leaves())
            if (leaf != *target) p.spec.features.push_back(leaf);
    } else {
        for (const std::string& name : ps.features) {
            auto f = p.net.find_variable(name);
            if (!f) throw StructuralError("unknown feature variable '" + name + "'");
            p.spec.features.push_back(*f);
        }
        p.spec.features = make_sorted(std::move(p.spec.features));
    }

    // class label: state name or index
    const Variable& tv = p.net.variable(*target);
    p.class_index = -1;
    if (!ps.class_label.empty()) {
        for (int s = 0; s < tv.card(); ++s)
            if (tv.states[static_cast<size_t>(s)] == ps.class_label) p.class_index = s;
        if (p.class_index < 0) {
            try {
                size_t pos = 0;
                int idx = std::stoi(ps.class_label, &pos);
                if (pos == ps.class_label.size() && idx >= 0 && idx < tv.card())
                    p.class_index = idx;
            } catch (...) {
            }
        }
        if (p.class_index < 0)
            throw StructuralError("unknown class '" + ps.class_label + "' for target '" +
                                  ps.target + "'");
    } else {
        p.class_index = 0;
    }

    if (ps.mode == "argmax") {
        p.spec.mode = Mode::Argmax;
    } else if (ps.mode.rfind("threshold:", 0) == 0) {
        p.spec.mode = Mode::Threshold;
        try {
            p.spec.threshold = std::stod(ps.mode.substr(10));
        } catch (...) {
            throw StructuralError("bad threshold in mode '" + ps.mode + "'");
        }
        p.spec.threshold_class = p.class_index;
    } else if (ps.mode == "threshold-avg") {
        p.spec.mode = Mode::Threshold;
        p.spec.threshold_class = p.class_index;
        p.spec.threshold = 0.5; // placeholder for validation; replaced below
        p.spec.validate();
        double t = average_posterior(p.spec, p.class_index, size_t{1} << 20);
        if (!(t > 0.0 && t < 1.0))
            throw StructuralError("average posterior threshold is degenerate");
        p.spec.threshold = t;
    } else {
        throw StructuralError("unknown mode '" + ps.mode + "'");
    }
    p.spec.validate();
    return p;
}

struct Prepared {
    Jointree jt;
    FTree ft;
};

Prepared prepare(const ClassifierSpec& spec) {
    Prepared out;
    out.jt = build_jointree(spec.net, minfill_order(spec.net));
    out.jt = normalize_shape(std::move(out.jt), spec.net, spec.features);
    out.jt = calibrate(std::move(out.jt), spec.net);
    out.ft = extract_ftree(out.jt, spec);
    return out;
}

Instantiation parse_instance_over_net(const std::string& text, const ClassifierSpec& spec) {
    Instantiation x;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw StructuralError("bad instance token '" + tok + "' (want VAR=state)");
        std::string var = tok.substr(0, eq), state = tok.substr(eq + 1);
        auto v = spec.net.find_variable(var);
        if (!v) throw StructuralError("unknown variable '" + var + "' in instance");
        const Variable& info = spec.net.variable(*v);
        auto it = std::find(info.states.begin(), info.states.end(), state);
        if (it == info.states.end())
            throw StructuralError("unknown state '" + state + "' of variable '" + var + "'");
        x.set(*v, static_cast<int>(it - info.states.begin()));
    }
    for (VarId f : spec.features)
        if (!x.contains(f))
            throw StructuralError("instance does not assign feature '" +
                                  spec.net.variable(f).name + "'");
    return x;
}

Instantiation parse_instance_over_store(const std::string& text, const NnfStore& store) {
    Instantiation x;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw StructuralError("bad instance token '" + tok + "' (want VAR=state)");
        std::string var = tok.substr(0, eq), state = tok.substr(eq + 1);
        auto v = store.find_variable(var);
        if (!v) throw StructuralError("unknown variable '" + var + "' in instance");
        const Variable& info = store.var(*v);
        auto it = std::find(info.states.begin(), info.states.end(), state);
        if (it == info.states.end())
            throw StructuralError("unknown state '" + state + "' of variable '" + var + "'");
        x.set(*v, static_cast<int>(it - info.states.begin()));
    }
    for (int v = 0; v < store.num_vars(); ++v)
        if (!x.contains(v))
            throw StructuralError("instance does not assign circuit variable '" +
                                  store.var(v).name + "'");
    return x;
}

int cmd_compile(const ProblemSpec& ps, const std::string& out_path, std::ostream& out) {
    Problem p = load_problem(ps);
    Prepared prep = prepare(p.spec);
    CompileResult result = compile_class_formula(p.spec, prep.ft, p.class_index);

    auto [store, root] = compact(result.store, result.root);
    std::ofstream file(out_path);
    if (!file) throw StructuralError("cannot write circuit file '" + out_path + "'");
    file << write_circuit(store, root);

    out << result.stats.to_record("compile") << " class=" << p.class_index
        << " out=" << out_path << "\n";
    return kExitOk;
}

int cmd_explain(const std::string& circuit_path, const std::string& instance, bool complete,
                bool general, bool sr, bool nr, bool do_gsr, bool do_gnr, std::ostream& out) {
    std::ifstream in(circuit_path);
    if (!in) throw StructuralError("cannot open circuit file '" + circuit_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    auto [store, root] = read_circuit(buf.str());
    Instantiation x = parse_instance_over_store(instance, store);

    if (!evaluate(store, root, x)) {
        out << "record=explain verdict=not_positive\n";
        return kExitNotPositive;
    }

    if (complete) {
        Reason r = complete_reason(store, root, x);
        out << "complete_reason:\n" << write_circuit(compact(store, r.root).first,
                                                     compact(store, r.root).second);
    }
    if (general) {
        Reason r = general_reason(store, root, x);
        out << "general_reason:\n" << write_circuit(compact(store, r.root).first,
                                                    compact(store, r.root).second);
    }
    auto print_set = [&](const char* label, const auto& members, bool is_term) {
        out << label << " count=" << members.size() << "\n";
        for (size_t i = 0; i < members.size(); ++i)
            out << label << " " << (i + 1) << ": " << to_string(store, members[i], is_term)
                << "\n";
    };
    if (sr) print_set("sr", sufficient_reasons(store, root, x), true);
    if (nr) print_set("nr", necessary_reasons(store, root, x), false);
    if (do_gsr) print_set("gsr", gsr(store, root, x), true);
    if (do_gnr) print_set("gnr", gnr(store, root, x), false);
    return kExitOk;
}

int cmd_contrast(const ProblemSpec& ps, const std::string& instance, const std::string& to,
                 std::ostream& out) {
    Problem p = load_problem(ps);
    ProblemSpec to_ps = ps;
    to_ps.class_label = to;
    Problem to_p = load_problem(to_ps); // reuses class-label resolution
    Prepared prep = prepare(p.spec);

    Instantiation x = parse_instance_over_net(instance, p.spec);
    int current = classify(p.spec, x);
    if (current == to_p.class_index)
        throw StructuralError("instance already belongs to class '" + to + "'");

    ContrastiveResult result =
        contrastive(p.spec, prep.ft, x, current, to_p.class_index);
    out << "record=contrast from=" << current << " to=" << to_p.class_index
        << " gnr_count=" << result.gnrs.size() << "\n";
    for (size_t i = 0; i < result.gnrs.size(); ++i)
        out << "gnr " << (i + 1) << ": "
            << to_string(result.complement.store, result.gnrs[i], false) << "\n";
    return kExitOk;
}

int cmd_check(const ProblemSpec& ps, const std::string& circuit_path, std::ostream& out) {
    Problem p = load_problem(ps);

    if (!circuit_path.empty()) {
        // check an external circuit against the oracle
        std::ifstream in(circuit_path);
        if (!in) throw StructuralError("cannot open circuit file '" + circuit_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        auto [store, root] = read_circuit(buf.str());
        OracleReport report = check_class_formula(p.spec, p.class_index, store, root);
        out << report.to_record() << "\n";
        return report.pass ? kExitOk : kExitCheckFailed;
    }

    Prepared prep = prepare(p.spec);
    bool all_pass = true;
    std::vector<CompileResult> compiled;
    for (int i = 0; i < p.spec.num_classes(); ++i) {
        compiled.push_back(compile_class_formula(p.spec, prep.ft, i));
        OracleReport report =
            check_class_formula(p.spec, i, compiled.back().store, compiled.back().root);
        out << report.to_record() << "\n";
        all_pass = all_pass && report.pass;
    }
    {
        CompileResult complement = compile_complement(p.spec, prep.ft, p.class_index);
        OracleReport report =
            check_complement_formula(p.spec, p.class_index, complement.store, complement.root);
        out << report.to_record() << "\n";
        all_pass = all_pass && report.pass;
    }

    // reason oracles on the first positive instance of the checked class
    auto classes = oracle_classify_all(p.spec);
    const auto& group = classes[static_cast<size_t>(p.class_index)];
    if (!group.empty() && p.spec.features.size() <= 10) {
        NnfStore& store = compiled[static_cast<size_t>(p.class_index)].store;
        NodeId root = compiled[static_cast<size_t>(p.class_index)].root;
        Instantiation x;
        for (size_t i = 0; i < p.spec.features.size(); ++i)
            x.set(static_cast<int>(i), group.front().at(p.spec.features[i]));
        std::vector<int> vars;
        for (int v = 0; v < store.num_vars(); ++v) vars.push_back(v);

        Reason cr = complete_reason(store, root, x);
        NodeId cr_oracle = oracle_complete_reason(store, root, x);
        bool cr_ok = equivalent(store, cr.root, cr_oracle, vars);
        out << "record=oracle object=complete_reason verdict=" << (cr_ok ? "pass" : "fail")
            << "\n";
        Reason gr = general_reason(store, root, x);
        NodeId gr_oracle = oracle_general_reason(store, root, x);
        bool gr_ok = equivalent(store, gr.root, gr_oracle, vars);
        out << "record=oracle object=general_reason verdict=" << (gr_ok ? "pass" : "fail")
            << "\n";
        all_pass = all_pass && cr_ok && gr_ok;
    }
    out << "record=check verdict=" << (all_pass ? "pass" : "fail") << "\n";
    return all_pass ? kExitOk : kExitCheckFailed;
}

struct BenchResult {
    size_t index = 0;
    std::string label;
    std::string status = "error";
    std::string detail;
    CompileStats stats;
    double seconds = 0.0;
};

ProblemSpec parse_manifest_line(const std::string& line) {
    ProblemSpec ps;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw StructuralError("bad manifest token '" + tok + "'");
        std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
        if (key == "net") {
            ps.net_path = value;
        } else if (key == "target") {
            ps.target = value;
        } else if (key == "features") {
            if (value == "all") {
                ps.all_leaves = true;
            } else {
                std::istringstream fs(value);
                std::string f;
                while (std::getline(fs, f, ',')) ps.features.push_back(f);
            }
        } else if (key == "class") {
            ps.class_label = value;
        } else if (key == "mode") {
            ps.mode = value;
        } else if (key == "seed") {
            ps.seed = std::stoull(value);
        } else {
            throw StructuralError("unknown manifest key '" + key + "'");
        }
    }
    if (ps.net_path.empty() || ps.target.empty())
        throw StructuralError("manifest line needs at least net= and target=");
    return ps;
}

int cmd_bench(const std::string& manifest_path, double timeout_s, int jobs, std::ostream& out) {
    std::ifstream in(manifest_path);
    if (!in) throw StructuralError("cannot open manifest '" + manifest_path + "'");
    std::vector<ProblemSpec> problems;
    std::string line;
    while (std::getline(in, line)) {
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        problems.push_back(parse_manifest_line(trimmed));
    }

    std::vector<BenchResult> results(problems.size());
    std::mutex next_mutex;
    size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            size_t i;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= problems.size()) return;
                i = next++;
            }
            BenchResult& r = results[i];
            r.index = i;
            r.label = problems[i].net_path + ":" + problems[i].target;
            auto start = std::chrono::steady_clock::now();
            try {
                Problem p = load_problem(problems[i]);
                Prepared prep = prepare(p.spec);
                CompileSettings settings;
                settings.has_deadline = true;
                settings.deadline =
                    start + std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
                CompileResult result =
                    compile_class_formula(p.spec, prep.ft, p.class_index, settings);
                r.stats = result.stats;
                r.status = "ok";
            } catch (const CapExceeded& e) {
                r.status = "timeout";
                r.detail = e.what();
            } catch (const std::exception& e) {
                r.status = "error";
                r.detail = e.what();
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                            .count();
        }
    };
    int nworkers = std::max(1, jobs);
    std::vector<std::thread> threads;
    for (int t = 0; t < nworkers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    for (const BenchResult& r : results) {
        out << "record=bench problem=" << r.index << " label=" << r.label
            << " status=" << r.status;
        if (r.status == "ok")
            out << " omega=" << r.stats.omega << " omega_t=" << r.stats.omega_t
                << " nodes=" << r.stats.node_count << " time_s=" << r.seconds;
        else
            out << " time_s=" << r.seconds;
        out << "\n";
    }

    // cactus table: completed runtimes sorted ascending, with prefix sums
    std::vector<double> ok_times;
    for (const BenchResult& r : results)
        if (r.status == "ok") ok_times.push_back(r.seconds);
    std::sort(ok_times.begin(), ok_times.end());
    double cumulative = 0.0;
    for (size_t i = 0; i < ok_times.size(); ++i) {
        cumulative += ok_times[i];
        out << "cactus rank=" << (i + 1) << " time_s=" << ok_times[i]
            << " cumulative_s=" << cumulative << "\n";
    }
    out << "record=bench_summary total=" << results.size() << " completed=" << ok_times.size()
        << " cumulative_s=" << cumulative << "\n";
    return kExitOk;
}

int cmd_gen(const std::string& kind, uint64_t seed, int vars, const std::string& out_path,
            std::ostream& out) {
    BayesNet net;
    if (kind == "fig1") {
        net = fixtures::figure1_net(seed);
    } else if (kind == "chain") {
        net = fixtures::random_chain(seed, vars);
    } else if (kind == "tree") {
        net = fixtures::random_tree(seed, vars);
    } else if (kind == "dag") {
        net = fixtures::random_dag(seed, vars);
    } else if (kind == "winscale") {
        net = fixtures::winscale_net(seed);
    } else if (kind == "disease") {
        net = fixtures::disease_net();
    } else if (kind == "early") {
        net = fixtures::early_decision_net(seed);
    } else {
        throw StructuralError("unknown fixture kind '" + kind + "'");
    }
    std::ofstream file(out_path);
    if (!file) throw StructuralError("cannot write '" + out_path + "'");
    file << serialize_bif(net, kind);
    out << "record=gen kind=" << kind << " seed=" << seed << " vars=" << net.num_vars()
        << " out=" << out_path << "\n";
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compiles Bayesian network classifiers into OR-decomposable NNF class "
                 "formulas and computes guaranteed explanations"};
    app.require_subcommand(1);

    ProblemSpec ps;
    std::string features_csv, out_path, circuit_path, instance, to_class, manifest, kind = "dag";
    double threshold = -1.0, timeout_s = 300.0;
    bool threshold_avg = false, argmax = false, all_leaves = false;
    bool f_complete = false, f_general = false, f_sr = false, f_nr = false, f_gsr = false,
         f_gnr = false;
    int jobs = 1, vars = 8;
    uint64_t seed = 1;

    auto add_problem_flags = [&](CLI::App* cmd, bool need_class) {
        cmd->add_option("--net", ps.net_path, "network file (.bif)")->required();
        cmd->add_option("--target", ps.target, "target variable name")->required();
        auto* feats = cmd->add_option("--features", features_csv, "comma-separated feature names");
        auto* all = cmd->add_flag("--all-leaves", all_leaves, "use every leaf as a feature");
        feats->excludes(all);
        auto* am = cmd->add_flag("--argmax", argmax, "argmax decision rule (default)");
        auto* th = cmd->add_option("--threshold", threshold, "threshold rule, t in (0,1)");
        auto* ta = cmd->add_flag("--threshold-avg", threshold_avg,
                                 "threshold rule at the average posterior");
        am->excludes(th)->excludes(ta);
        th->excludes(ta);
        auto* cls = cmd->add_option("--class", ps.class_label, "class state name or index");
        if (need_class) cls->required();
    };

    auto* compile = app.add_subcommand("compile", "compile a class formula circuit");
    add_problem_flags(compile, true);
    compile->add_option("--out", out_path, "output circuit path")->required();

    auto* explain = app.add_subcommand("explain", "reasons for a decision on a circuit");
    explain->add_option("--circuit", circuit_path, "mvnnf circuit file")->required();
    explain->add_option("--instance", instance, "VAR=state,... over the circuit variables")
        ->required();
    explain->add_flag("--complete", f_complete, "print the complete reason circuit");
    explain->add_flag("--general", f_general, "print the general reason circuit");
    explain->add_flag("--sr", f_sr, "sufficient reasons");
    explain->add_flag("--nr", f_nr, "necessary reasons");
    explain->add_flag("--gsr", f_gsr, "general sufficient reasons");
    explain->add_flag("--gnr", f_gnr, "general necessary reasons");

    auto* contrast = app.add_subcommand("contrast", "why not another class");
    add_problem_flags(contrast, false);
    contrast->add_option("--instance", instance, "VAR=state,... over the features")->required();
    contrast->add_option("--to", to_class, "contrast class (state name or index)")->required();

    auto* check = app.add_subcommand("check", "verify compilations against the oracle");
    add_problem_flags(check, false);
    check->add_option("--circuit", circuit_path, "check this circuit instead of compiling");

    auto* bench = app.add_subcommand("bench", "run a manifest of problems");
    bench->add_option("--manifest", manifest, "one problem per line")->required();
    bench->add_option("--timeout", timeout_s, "per-problem timeout in seconds");
    bench->add_option("--jobs", jobs, "parallel workers");

    auto* gen = app.add_subcommand("gen", "write a seeded fixture network");
    gen->add_option("--kind", kind, "fig1|chain|tree|dag|winscale|disease|early");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--vars", vars, "variable count (chain/tree/dag)");
    gen->add_option("--out", out_path, "output .bif path")->required();

    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitProblem;
    }

    if (!features_csv.empty()) {
        std::istringstream fs(features_csv);
        std::string f;
        while (std::getline(fs, f, ',')) ps.features.push_back(f);
    }
    ps.all_leaves = all_leaves;
    if (threshold >= 0.0)
        ps.mode = "threshold:" + std::to_string(threshold);
    else if (threshold_avg)
        ps.mode = "threshold-avg";
    else
        ps.mode = "argmax";
    ps.seed = seed;

    try {
        if (compile->parsed()) return cmd_compile(ps, out_path, out);
        if (explain->parsed())
            return cmd_explain(circuit_path, instance, f_complete, f_general, f_sr, f_nr, f_gsr,
                               f_gnr, out);
        if (contrast->parsed()) return cmd_contrast(ps, instance, to_class, out);
        if (check->parsed()) return cmd_check(ps, circuit_path, out);
        if (bench->parsed()) return cmd_bench(manifest, timeout_s, jobs, out);
        if (gen->parsed()) return cmd_gen(kind, seed, vars, out_path, out);
    } catch (const CapExceeded& e) {
        err << "error: " << e.what() << "\n";
        return kExitCap;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitProblem;
    }
    err << "error: no subcommand\n";
    return kExitProblem;
}

} // namespace bnc
