#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "er/analysis.hpp"
#include "er/chase.hpp"
#include "er/datalog.hpp"
#include "er/encoding.hpp"
#include "er/gen.hpp"
#include "er/integration.hpp"
#include "er/io.hpp"
#include "er/resolution.hpp"

using namespace er;

namespace {

constexpr int kYes = 0;
constexpr int kNo = 1;
constexpr int kUnknown = 2;
constexpr int kUsage = 3;
constexpr int kDisagreement = 4;

bool logging() {
    const char* v = std::getenv("ER_ENGINE_LOG");
    return v && *v;
}

Program load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_program(ss.str());
}

bool has_constants(const Program& p) {
    for (const auto& a : p.database.atoms)
        for (const auto& t : a.args)
            if (!t.is_var()) return true;
    for (const auto& q : p.queries) {
        if (!q.free_vars.empty()) return true;
        for (const auto& cl : q.clauses) {
            if (!cl.equalities.empty()) return true;
            for (const auto& a : cl.atoms)
                for (const auto& t : a.args)
                    if (!t.is_var()) return true;
        }
    }
    return false;
}

Instance plain_database(const Database& d) {
    Instance out;
    for (const auto& ga : d.atoms) {
        Atom a{ga.pred, {}};
        for (const auto& t : ga.args) a.args.push_back(t.var);
        out.insert(a);
    }
    return out;
}

std::vector<Instance> plain_queries(const Program& p) {
    std::vector<Instance> qs;
    for (const auto& q : p.queries)
        for (const auto& cl : q.clauses) {
            Instance i;
            for (const auto& a : cl.atoms) {
                Atom b{a.pred, {}};
                for (const auto& t : a.args) b.args.push_back(t.var);
                i.insert(b);
            }
            qs.push_back(i);
        }
    return qs;
}

int certainty_code(Certainty c) {
    switch (c) {
        case Certainty::Yes:
            return kYes;
        case Certainty::No:
            return kNo;
        default:
            return kUnknown;
    }
}

const char* certainty_text(Certainty c) {
    switch (c) {
        case Certainty::Yes:
            return "yes";
        case Certainty::No:
            return "no";
        default:
            return "unknown";
    }
}

struct Budgets {
    size_t steps = ChaseBudget{}.max_steps;
    size_t atoms = ChaseBudget{}.max_atoms_per_instance;
    size_t instances = ChaseBudget{}.max_instances;

    ChaseBudget chase() const { return ChaseBudget{steps, atoms, instances}; }
    ResolutionBudget resolution() const {
        ResolutionBudget b;
        b.max_resolvents = steps;
        return b;
    }
};

int cmd_chase(const Program& p, const Budgets& b, bool json) {
    Instance d = has_constants(p) ? star_database(p.database) : plain_database(p.database);
    auto res = saturated_chase({d}, p.dependencies(), b.chase());
    if (json) {
        std::cout << instances_json(res.instances) << "\n";
    } else {
        for (size_t i = 0; i < res.instances.size(); ++i) {
            std::cout << "# instance " << i + 1 << "\n";
            for (const auto& a : res.instances[i].atoms()) std::cout << to_string(a) << ".\n";
        }
        std::cout << "# status "
                  << (res.status == SaturationStatus::Fixpoint ? "fixpoint" : "budget") << "\n";
    }
    return res.status == SaturationStatus::Fixpoint ? kYes : kUnknown;
}

int cmd_resolve(const Program& p, const Budgets& b, bool json) {
    if (p.queries.empty()) {
        std::cerr << "resolve: input has no query\n";
        return kUsage;
    }
    const UCQEqQuery& q = p.queries.front();
    auto clauses = star_query(q);
    auto rs = saturated_resolution(clauses, p.dependencies(), b.resolution());
    UCQEqQuery rewritten = unstar_rewriting(rs.queries, q.free_vars);
    rewritten.name = q.name;
    if (json) {
        std::cout << instances_json(rs.queries) << "\n";
    } else {
        std::cout << serialize_query(rewritten) << "\n";
        std::cout << "# status "
                  << (rs.status == SaturationStatus::Fixpoint ? "fixpoint" : "budget") << "\n";
    }
    return rs.status == SaturationStatus::Fixpoint ? kYes : kUnknown;
}

int cmd_analyze(const Program& p, bool json) {
    ClassFlags f = classify(p.tgds);
    bool sticky = is_sticky(p.tgds).sticky;
    bool guarded = !p.tgds.empty();
    bool beta = guarded;
    for (const auto& r : p.tgds) {
        auto g = guard_report(r);
        guarded = guarded && g.guarded;
        beta = beta && g.beta_guarded;
    }
    bool wa = weak_acyclicity(p.tgds);
    size_t k = wa ? depth_bound(p.tgds) : 0;
    auto flag = [&](const char* name, bool v) {
        std::cout << name << (json ? "\": " : ": ") << (v ? "true" : "false");
    };
    if (json) {
        std::cout << "{";
        std::cout << "\"";
        flag("lav", f.lav);
        std::cout << ", \"";
        flag("lossless", f.lossless);
        std::cout << ", \"";
        flag("acyclic", f.acyclic);
        std::cout << ", \"";
        flag("datalog", f.datalog);
        std::cout << ", \"";
        flag("sticky", sticky);
        std::cout << ", \"";
        flag("guarded", guarded);
        std::cout << ", \"";
        flag("betaGuarded", beta);
        std::cout << ", \"";
        flag("weaklyAcyclic", wa);
        std::cout << ", \"depthBound\": " << k << "}\n";
    } else {
        flag("lav", f.lav);
        std::cout << "\n";
        flag("lossless", f.lossless);
        std::cout << "\n";
        flag("acyclic", f.acyclic);
        std::cout << "\n";
        flag("datalog", f.datalog);
        std::cout << "\n";
        flag("sticky", sticky);
        std::cout << "\n";
        flag("guarded", guarded);
        std::cout << "\n";
        flag("beta-guarded", beta);
        std::cout << "\n";
        flag("weakly-acyclic", wa);
        std::cout << "\n";
        std::cout << "depth-bound: " << k << "\n";
    }
    return kYes;
}

int cmd_simplify(const Program& p, bool json) {
    auto res = simplify_fixpoint(p.tgds);
    std::vector<Tgd> all = res.simplified;
    all.insert(all.end(), res.transfer.begin(), res.transfer.end());
    if (json) {
        std::cout << "{\"ruleCount\": " << all.size() << ", \"steps\": " << res.trace.size()
                  << "}\n";
        return kYes;
    }
    for (const auto& r : all) std::cout << serialize_tgd(r) << "\n";
    std::cout << "# inverse rules\n";
    for (const auto& r : res.inverse) std::cout << "# " << serialize_tgd(r) << "\n";
    return kYes;
}

int cmd_integrate(const Program& p, bool json) {
    auto res = integrate_all(p.tgds, p.fds);
    if (json) {
        std::cout << "{\"success\": " << (res.success ? "true" : "false")
                  << ", \"ruleCount\": " << res.rules.size() << "}\n";
    } else {
        for (const auto& r : res.rules) std::cout << serialize_tgd(r) << "\n";
        std::cout << "# status " << (res.success ? "success" : "failed") << "\n";
    }
    return res.success ? kYes : kUnknown;
}

int cmd_rewrite(const Program& p, const std::string& method, long k_flag, const Budgets& b,
                bool json) {
    std::vector<Instance> qs = plain_queries(p);
    if (qs.empty()) {
        std::cerr << "rewrite: input has no query\n";
        return kUsage;
    }
    std::vector<Tgd> sigma = p.tgds;
    if (!p.egds.empty() || !p.fds.empty()) sigma = sim_e(p.dependencies());

    DatalogRewriting rw;
    if (method == "depth") {
        if (!weak_acyclicity(sigma)) {
            std::cerr << "rewrite: rules are not weakly acyclic; depth method unavailable\n";
            return kUnknown;
        }
        size_t k = k_flag > 0 ? (size_t)k_flag : depth_bound(sigma);
        rw = datalog_from_depth(sigma, qs, k);
    } else if (method == "guarded") {
        rw = guarded_datalog_rewriting(sigma, qs, FlattenBudget{});
    } else if (method == "sticky") {
        auto rs = saturated_resolution(qs, DependencySet{sigma, {}}, b.resolution());
        if (rs.status != SaturationStatus::Fixpoint) {
            std::cerr << "rewrite: resolution did not saturate within budget\n";
            return kUnknown;
        }
        rw = datalog_from_queries(rs.queries);
    } else {
        std::cerr << "rewrite: unknown method " << method << "\n";
        return kUsage;
    }
    if (json) {
        std::cout << "{\"auxiliaryPredicates\": [";
        bool first = true;
        for (const auto& a : rw.auxiliary) {
            if (!first) std::cout << ", ";
            first = false;
            std::cout << "\"" << a.name << "\"";
        }
        std::cout << "], \"ruleCount\": " << rw.program.size() << ", \"goal\": \""
                  << rw.goal_pred.name << "\"}\n";
    } else {
        for (const auto& r : rw.program) std::cout << serialize_tgd(r) << "\n";
        std::cout << "# goal " << rw.goal_pred.name << "\n";
        std::cout << "# auxiliary " << rw.auxiliary.size() << "\n";
    }
    return kYes;
}

int cmd_answer(const Program& p, const std::string& engine, long k_flag, const Budgets& b,
               bool json) {
    if (p.queries.empty()) {
        std::cerr << "answer: input has no query\n";
        return kUsage;
    }
    if (has_constants(p)) {
        const UCQEqQuery& q = p.queries.front();
        auto tuples = certain_answers(p.database, p.dependencies(), q, b.resolution(), b.chase());
        if (!tuples) {
            std::cout << (json ? "{\"answer\": \"unknown\"}" : "unknown") << "\n";
            return kUnknown;
        }
        if (q.free_vars.empty()) {
            bool yes = !tuples->empty();
            std::cout << (json ? (yes ? "{\"answer\": \"yes\"}" : "{\"answer\": \"no\"}")
                               : (yes ? "yes" : "no"))
                      << "\n";
            return yes ? kYes : kNo;
        }
        for (const auto& t : *tuples) {
            for (size_t i = 0; i < t.size(); ++i) std::cout << (i ? "," : "") << t[i].label;
            std::cout << "\n";
        }
        return tuples->empty() ? kNo : kYes;
    }

    Instance d = plain_database(p.database);
    std::vector<Instance> qs = plain_queries(p);
    DependencySet sigma = p.dependencies();
    Certainty c = Certainty::Unknown;
    if (engine == "chase") {
        c = certain_via_chase(d, sigma, qs, b.chase());
    } else if (engine == "resolution") {
        c = certain_via_resolution(d, sigma, qs, b.resolution());
    } else if (engine == "integration") {
        c = answer_with_integration(d, p.tgds, p.fds, qs, b.chase());
    } else if (engine == "datalog") {
        std::vector<Tgd> rules = sigma.tgds;
        if (!sigma.egds.empty()) {
            // route the query through a goal rule so sim_e splits its repeated
            // variables the same way it splits rule bodies
            Predicate g{"goal$$", 0};
            DependencySet ext = sigma;
            for (const auto& q : qs) ext.tgds.push_back(Tgd{q, Instance({Atom{g, {}}})});
            rules = sim_e(ext);
            qs = {Instance({Atom{g, {}}})};
        }
        if (!weak_acyclicity(rules)) {
            std::cerr << "answer: rules are not weakly acyclic; datalog engine unavailable\n";
            return kUnknown;
        }
        size_t k = k_flag > 0 ? (size_t)k_flag : depth_bound(rules);
        auto rw = datalog_from_depth(rules, qs, k);
        c = answer_via_datalog(d, rw) ? Certainty::Yes : Certainty::No;
    } else if (engine == "flat") {
        if (!sigma.egds.empty()) {
            std::cerr << "answer: flat engine does not support egds\n";
            return kUnknown;
        }
        auto rw = guarded_datalog_rewriting(p.tgds, qs, FlattenBudget{});
        c = answer_via_datalog(d, rw) ? Certainty::Yes : Certainty::No;
    } else {
        std::cerr << "answer: unknown engine " << engine << "\n";
        return kUsage;
    }
    if (json)
        std::cout << "{\"answer\": \"" << certainty_text(c) << "\"}\n";
    else
        std::cout << certainty_text(c) << "\n";
    return certainty_code(c);
}

RuleClass parse_class(const std::string& s) {
    if (s == "any") return RuleClass::Any;
    if (s == "lav") return RuleClass::Lav;
    if (s == "lossless") return RuleClass::Lossless;
    if (s == "acyclic") return RuleClass::Acyclic;
    if (s == "sticky") return RuleClass::Sticky;
    if (s == "guarded") return RuleClass::Guarded;
    if (s == "weakly-acyclic") return RuleClass::WeaklyAcyclic;
    if (s == "fd-integrable") return RuleClass::FdIntegrable;
    if (s == "egd-terminating") return RuleClass::EgdTerminating;
    throw std::invalid_argument("unknown class " + s);
}

// Definite answers from every applicable engine; Unknown entries never count
// as disagreements.
std::vector<std::pair<std::string, Certainty>> engine_answers(const GeneratedCase& c,
                                                              RuleClass cls, const Budgets& b) {
    DependencySet sigma{c.tgds, c.egds};
    for (const auto& fd : c.fds) sigma.egds.push_back(fd.as_egd());
    std::vector<std::pair<std::string, Certainty>> out;
    out.emplace_back("chase", certain_via_chase(c.database, sigma, c.queries, b.chase()));
    out.emplace_back("resolution",
                     certain_via_resolution(c.database, sigma, c.queries, b.resolution()));
    if (sigma.egds.empty() && weak_acyclicity(c.tgds)) {
        try {
            auto rw = datalog_from_depth(c.tgds, c.queries, depth_bound(c.tgds));
            out.emplace_back("datalog",
                             answer_via_datalog(c.database, rw) ? Certainty::Yes : Certainty::No);
        } catch (const std::exception&) {
            out.emplace_back("datalog", Certainty::Unknown);
        }
    }
    if (cls == RuleClass::FdIntegrable) {
        try {
            out.emplace_back("integration",
                             answer_with_integration(c.database, c.tgds, c.fds, c.queries,
                                                     b.chase()));
        } catch (const std::exception&) {
            out.emplace_back("integration", Certainty::Unknown);
        }
    }
    bool all_guarded = !c.tgds.empty() && sigma.egds.empty();
    for (const auto& r : c.tgds)
        if (!guard_report(r).guarded) all_guarded = false;
    if (all_guarded) {
        try {
            auto rw = guarded_datalog_rewriting(c.tgds, c.queries, FlattenBudget{});
            out.emplace_back("guarded",
                             answer_via_datalog(c.database, rw) ? Certainty::Yes : Certainty::No);
        } catch (const std::exception&) {
            out.emplace_back("guarded", Certainty::Unknown);
        }
    }
    return out;
}

bool disagree(const std::vector<std::pair<std::string, Certainty>>& answers) {
    bool yes = false, no = false;
    for (const auto& [name, c] : answers) {
        yes = yes || c == Certainty::Yes;
        no = no || c == Certainty::No;
    }
    return yes && no;
}

void print_case(const GeneratedCase& c) {
    for (const auto& r : c.tgds) std::cout << serialize_tgd(r) << "\n";
    for (const auto& e : c.egds) std::cout << serialize_egd(e) << "\n";
    for (const auto& fd : c.fds) std::cout << serialize_fd(fd) << "\n";
    for (const auto& a : c.database.atoms()) std::cout << to_string(a) << ".\n";
    for (const auto& q : c.queries) std::cout << "# query " << to_string(q) << "\n";
}

int cmd_crosscheck(long cases, long seed, const std::string& cls_name, const Budgets& bin) {
    RuleClass cls = parse_class(cls_name);
    // generated cases are tiny; a diverging saturation should give up quickly
    Budgets b = bin;
    b.steps = std::min(b.steps, size_t{300});
    b.atoms = std::min(b.atoms, size_t{120});
    b.instances = std::min(b.instances, size_t{120});
    std::mt19937 rng((unsigned)seed);
    for (long i = 0; i < cases; ++i) {
        GeneratedCase c = generate_case(rng, cls);
        auto answers = engine_answers(c, cls, b);
        if (logging()) {
            std::cerr << "case " << i << ":";
            for (const auto& [name, a] : answers) std::cerr << " " << name << "=" << certainty_text(a);
            std::cerr << "\n";
        }
        if (disagree(answers)) {
            auto still_failing = [&](const GeneratedCase& g) {
                return disagree(engine_answers(g, cls, b));
            };
            GeneratedCase small = shrink_case(c, still_failing);
            std::cout << "disagreement at case " << i << "\n";
            for (const auto& [name, a] : engine_answers(small, cls, b))
                std::cout << name << ": " << certainty_text(a) << "\n";
            print_case(small);
            return kDisagreement;
        }
    }
    std::cout << cases << " cases, no disagreement\n";
    return kYes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conjunctive query answering under tgds and egds"};
    app.require_subcommand(1);

    std::string input, engine = "chase", method = "depth", cls = "weakly-acyclic";
    Budgets budgets;
    long k_flag = 0, seed = 0, cases = 100;
    bool json = false;

    auto add_common = [&](CLI::App* c, bool needs_input) {
        if (needs_input) c->add_option("input", input, "input .dlg file")->required();
        c->add_option("--budget-steps", budgets.steps, "step / resolvent budget");
        c->add_option("--budget-atoms", budgets.atoms, "atoms per instance budget");
        c->add_option("--budget-instances", budgets.instances, "instance budget");
        c->add_flag("--json", json, "JSON output");
    };

    auto* chase_cmd = app.add_subcommand("chase", "saturate the database under the rules");
    add_common(chase_cmd, true);
    auto* resolve_cmd = app.add_subcommand("resolve", "saturate the query rewriting");
    add_common(resolve_cmd, true);
    auto* analyze_cmd = app.add_subcommand("analyze", "report rule classes");
    add_common(analyze_cmd, true);
    auto* simplify_cmd = app.add_subcommand("simplify", "simplify the rule set");
    add_common(simplify_cmd, true);
    auto* integrate_cmd = app.add_subcommand("integrate", "integrate functional dependencies");
    add_common(integrate_cmd, true);
    auto* rewrite_cmd = app.add_subcommand("rewrite", "emit a datalog rewriting");
    add_common(rewrite_cmd, true);
    rewrite_cmd->add_option("--method", method, "depth | guarded | sticky");
    rewrite_cmd->add_option("--k", k_flag, "depth bound override");
    auto* answer_cmd = app.add_subcommand("answer", "certain answer of the query");
    add_common(answer_cmd, true);
    answer_cmd->add_option("--engine", engine,
                           "chase | resolution | datalog | integration | flat");
    answer_cmd->add_option("--k", k_flag, "depth bound override");
    auto* cross_cmd = app.add_subcommand("crosscheck", "differential test of the engines");
    add_common(cross_cmd, false);
    cross_cmd->add_option("--cases", cases, "number of generated cases");
    cross_cmd->add_option("--seed", seed, "rng seed");
    cross_cmd->add_option("--class", cls, "rule class to generate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (cross_cmd->parsed()) return cmd_crosscheck(cases, seed, cls, budgets);
        Program p = load(input);
        if (chase_cmd->parsed()) return cmd_chase(p, budgets, json);
        if (resolve_cmd->parsed()) return cmd_resolve(p, budgets, json);
        if (analyze_cmd->parsed()) return cmd_analyze(p, json);
        if (simplify_cmd->parsed()) return cmd_simplify(p, json);
        if (integrate_cmd->parsed()) return cmd_integrate(p, json);
        if (rewrite_cmd->parsed()) return cmd_rewrite(p, method, k_flag, budgets, json);
        if (answer_cmd->parsed()) return cmd_answer(p, engine, k_flag, budgets, json);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUnknown;
    }
    return kUsage;
}
