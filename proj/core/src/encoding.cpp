#include "er/encoding.hpp"

#include <algorithm>
#include <map>

namespace er {

namespace {

// soft constants are tagged with a leading quote so the two kinds cannot clash
std::string constant_tag(const Constant& c) {
    return c.kind == Constant::Kind::Soft ? "'" + c.label : c.label;
}

Constant constant_from_tag(const std::string& tag) {
    if (!tag.empty() && tag[0] == '\'')
        return Constant{tag.substr(1), Constant::Kind::Soft};
    return Constant{tag, Constant::Kind::Hard};
}

Variable term_var(const Term& t) {
    return t.is_var() ? t.var : constant_var(t.constant);
}

std::set<Constant> constants_of(const Database& d) {
    std::set<Constant> out;
    for (const auto& a : d.atoms)
        for (const auto& t : a.args)
            if (!t.is_var()) out.insert(t.constant);
    return out;
}

std::set<Constant> constants_of(const UCQEqQuery& q) {
    std::set<Constant> out;
    for (const auto& cl : q.clauses) {
        for (const auto& a : cl.atoms)
            for (const auto& t : a.args)
                if (!t.is_var()) out.insert(t.constant);
        for (const auto& e : cl.equalities) {
            if (!e.lhs.is_var()) out.insert(e.lhs.constant);
            if (!e.rhs.is_var()) out.insert(e.rhs.constant);
        }
    }
    return out;
}

Instance star_with(const Database& d, const std::set<Constant>& delta) {
    Instance out;
    for (const auto& a : d.atoms) {
        Atom b{a.pred, {}};
        for (const auto& t : a.args) b.args.push_back(term_var(t));
        out.insert(b);
    }
    for (const auto& c : delta) out.insert(Atom{constant_pred(c), {constant_var(c)}});
    for (const auto& c : delta) {
        if (c.kind != Constant::Kind::Hard) continue;
        for (const auto& c2 : delta) {
            if (c2.kind != Constant::Kind::Hard || c == c2) continue;
            out.insert(Atom{kNeq, {constant_var(c), constant_var(c2)}});
        }
    }
    return out;
}

// replace eq$ atoms by merging their (variable) endpoints
Instance strip_equalities(const Instance& clause) {
    Instance cur = clause;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& a : cur.atoms()) {
            if (a.pred != kEq || a.args[0] == a.args[1]) continue;
            Renaming t;
            t.set(std::max(a.args[0], a.args[1]), std::min(a.args[0], a.args[1]));
            cur = apply_renaming(cur, t);
            changed = true;
            break;
        }
    }
    Instance out;
    for (const auto& a : cur.atoms())
        if (a.pred != kEq) out.insert(a);
    return out;
}

}  // namespace

Variable constant_var(const Constant& c) { return Variable{"v$" + constant_tag(c)}; }

Predicate constant_pred(const Constant& c) { return Predicate{"const$" + constant_tag(c), 1}; }

Predicate free_var_pred(size_t i) { return Predicate{"fv$" + std::to_string(i), 1}; }

Instance star_database(const Database& d) { return star_with(d, constants_of(d)); }

std::vector<Instance> star_query(const UCQEqQuery& q) {
    std::vector<Instance> out;
    for (const auto& cl : q.clauses) {
        Instance enc;
        std::set<Constant> used;
        for (const auto& a : cl.atoms) {
            Atom b{a.pred, {}};
            for (const auto& t : a.args) {
                b.args.push_back(term_var(t));
                if (!t.is_var()) used.insert(t.constant);
            }
            enc.insert(b);
        }
        for (const auto& e : cl.equalities) {
            enc.insert(Atom{kEq, {term_var(e.lhs), term_var(e.rhs)}});
            if (!e.lhs.is_var()) used.insert(e.lhs.constant);
            if (!e.rhs.is_var()) used.insert(e.rhs.constant);
        }
        for (const auto& c : used) enc.insert(Atom{constant_pred(c), {constant_var(c)}});
        for (size_t i = 0; i < q.free_vars.size(); ++i)
            enc.insert(Atom{free_var_pred(i + 1), {q.free_vars[i]}});
        out.push_back(enc);
    }
    return out;
}

UCQEqQuery unstar_rewriting(const std::vector<Instance>& rs,
                            const std::vector<Variable>& free_vars) {
    UCQEqQuery q;
    q.free_vars = free_vars;
    for (const auto& clause : rs) {
        QueryClause cl;
        std::map<Variable, Term> sub;
        for (const auto& a : clause.atoms()) {
            const std::string& n = a.pred.name;
            if (n.rfind("const$", 0) == 0 && a.pred.arity == 1) {
                Constant c = constant_from_tag(n.substr(6));
                if (a.args[0] == constant_var(c))
                    sub[a.args[0]] = Term::make_const(c);
                else
                    cl.equalities.push_back(
                        {Term::make_var(a.args[0]), Term::make_const(c)});
            } else if (n.rfind("fv$", 0) == 0 && a.pred.arity == 1) {
                size_t i = std::stoull(n.substr(3));
                if (i >= 1 && i <= free_vars.size() && a.args[0] != free_vars[i - 1])
                    cl.equalities.push_back(
                        {Term::make_var(a.args[0]), Term::make_var(free_vars[i - 1])});
            } else if (a.pred == kEq) {
                cl.equalities.push_back(
                    {Term::make_var(a.args[0]), Term::make_var(a.args[1])});
            }
        }
        for (const auto& a : clause.atoms()) {
            const std::string& n = a.pred.name;
            if ((n.rfind("const$", 0) == 0 && a.pred.arity == 1) ||
                (n.rfind("fv$", 0) == 0 && a.pred.arity == 1) || a.pred == kEq)
                continue;
            GroundAtom g{a.pred, {}};
            for (const auto& v : a.args) {
                auto it = sub.find(v);
                g.args.push_back(it == sub.end() ? Term::make_var(v) : it->second);
            }
            cl.atoms.push_back(g);
        }
        for (auto& e : cl.equalities) {
            if (e.lhs.is_var() && sub.count(e.lhs.var)) e.lhs = sub.at(e.lhs.var);
            if (e.rhs.is_var() && sub.count(e.rhs.var)) e.rhs = sub.at(e.rhs.var);
        }
        q.clauses.push_back(std::move(cl));
    }
    return q;
}

Satisfiability satisfiable(const Database& d, const DependencySet& sigma, const ChaseBudget& b) {
    Instance probe({Atom{kNeq, {Variable{"x"}, Variable{"x"}}}});
    switch (certain_via_chase(star_database(d), sigma, {probe}, b)) {
        case Certainty::Yes: return Satisfiability::Unsat;
        case Certainty::No: return Satisfiability::Sat;
        default: return Satisfiability::Unknown;
    }
}

std::optional<std::vector<std::vector<Constant>>> certain_answers(const Database& d,
                                                                  const DependencySet& sigma,
                                                                  const UCQEqQuery& q,
                                                                  const ResolutionBudget& rb,
                                                                  const ChaseBudget& cb) {
    std::set<Constant> delta = constants_of(d);
    for (const auto& c : constants_of(q)) delta.insert(c);
    std::vector<Constant> domain(delta.begin(), delta.end());
    Instance base = star_with(d, delta);
    std::vector<Instance> qstar = star_query(q);

    size_t arity = q.free_vars.size();
    std::vector<std::vector<Constant>> tuples;
    std::vector<size_t> pick(arity, 0);
    if (arity == 0) {
        tuples.push_back({});
    } else if (!domain.empty()) {
        while (true) {
            std::vector<Constant> t;
            for (size_t k : pick) t.push_back(domain[k]);
            tuples.push_back(std::move(t));
            size_t k = 0;
            while (k < arity && ++pick[k] == domain.size()) pick[k++] = 0;
            if (k == arity) break;
        }
    }

    auto bind = [&](const std::vector<Constant>& tuple) {
        Instance target = base;
        for (size_t i = 0; i < tuple.size(); ++i)
            target.insert(Atom{free_var_pred(i + 1), {constant_var(tuple[i])}});
        return target;
    };

    RewritingSet rewriting = saturated_resolution(qstar, sigma, rb);
    if (rewriting.status == SaturationStatus::Fixpoint) {
        std::vector<Instance> clauses;
        for (const auto& r : rewriting.queries) clauses.push_back(strip_equalities(r));
        std::vector<std::vector<Constant>> out;
        for (const auto& tuple : tuples)
            if (entails_any(bind(tuple), clauses)) out.push_back(tuple);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<Instance> stripped;
    for (const auto& c : qstar) stripped.push_back(strip_equalities(c));
    std::vector<std::vector<Constant>> out;
    for (const auto& tuple : tuples) {
        switch (certain_via_chase(bind(tuple), sigma, stripped, cb)) {
            case Certainty::Yes: out.push_back(tuple); break;
            case Certainty::No: break;
            default: return std::nullopt;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace er
