#include "er/datalog.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <functional>
#include <stdexcept>

namespace er {

namespace {

std::vector<Variable> sorted_vars(const std::set<Variable>& s) {
    return std::vector<Variable>(s.begin(), s.end());
}

bool subset_atoms(const Instance& small, const Instance& big) {
    for (const auto& a : small.atoms())
        if (!big.contains(a)) return false;
    return true;
}

Instance union_atoms(const Instance& a, const Instance& b) {
    Instance out = a;
    out.insert_all(b);
    return out;
}

}  // namespace

SkolemTerm SkolemTerm::make_var(Variable v) {
    SkolemTerm t;
    t.is_var = true;
    t.var = std::move(v);
    return t;
}

SkolemTerm SkolemTerm::make_fn(std::string fn, std::vector<SkolemTerm> args) {
    SkolemTerm t;
    t.is_var = false;
    t.fn = std::move(fn);
    t.args = std::move(args);
    return t;
}

std::strong_ordering SkolemTerm::operator<=>(const SkolemTerm& o) const {
    if (auto c = is_var <=> o.is_var; c != 0) return c;
    if (auto c = var <=> o.var; c != 0) return c;
    if (auto c = fn <=> o.fn; c != 0) return c;
    return std::lexicographical_compare_three_way(args.begin(), args.end(),
                                                  o.args.begin(), o.args.end());
}

bool SkolemTerm::operator==(const SkolemTerm& o) const { return (*this <=> o) == 0; }

size_t SkolemTerm::depth() const {
    if (is_var) return 1;
    size_t m = 0;
    for (const auto& a : args) m = std::max(m, a.depth());
    return 1 + m;
}

std::string to_string(const SkolemTerm& t) {
    if (t.is_var) return t.var.name;
    std::string s = t.fn + "(";
    for (size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(t.args[i]);
    }
    return s + ")";
}

std::string to_string(const SkolemAtom& a) {
    std::string s = a.pred.name + "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(a.args[i]);
    }
    return s + ")";
}

LogicProgram skolemize(const std::vector<Tgd>& sigma) {
    LogicProgram p;
    size_t counter = 0;
    for (const auto& r : sigma) {
        auto fr = r.frontier();
        auto ex = r.existential();
        std::vector<Variable> xbar;
        for (const auto& atom : r.head.atoms())
            for (const auto& v : atom.args)
                if (fr.count(v) && std::find(xbar.begin(), xbar.end(), v) == xbar.end())
                    xbar.push_back(v);
        std::map<Variable, SkolemTerm> zterm;
        for (const auto& z : ex) {
            std::vector<SkolemTerm> args;
            for (const auto& x : xbar) args.push_back(SkolemTerm::make_var(x));
            zterm.emplace(z, SkolemTerm::make_fn("f" + std::to_string(++counter), args));
        }
        LogicRule lr{r.body, {}};
        for (const auto& atom : r.head.atoms()) {
            SkolemAtom sa{atom.pred, {}};
            for (const auto& v : atom.args) {
                auto it = zterm.find(v);
                sa.args.push_back(it == zterm.end() ? SkolemTerm::make_var(v) : it->second);
            }
            lr.head.push_back(sa);
        }
        p.rules.push_back(std::move(lr));
    }
    return p;
}

namespace {

SkolemTerm subst_term(const SkolemTerm& t, const std::map<Variable, SkolemTerm>& th) {
    if (t.is_var) {
        auto it = th.find(t.var);
        return it == th.end() ? t : it->second;
    }
    std::vector<SkolemTerm> args;
    for (const auto& a : t.args) args.push_back(subst_term(a, th));
    return SkolemTerm::make_fn(t.fn, std::move(args));
}

SkolemAtom subst_atom(const SkolemAtom& a, const std::map<Variable, SkolemTerm>& th) {
    SkolemAtom out{a.pred, {}};
    for (const auto& t : a.args) out.args.push_back(subst_term(t, th));
    return out;
}

// Backtracking matcher: body atoms (plain variables) against skolem facts,
// variables bound to terms of depth <= k. Calls emit for every assignment.
void match_body(const std::vector<Atom>& body, const std::set<SkolemAtom>& facts, size_t k,
                const std::function<void(const std::map<Variable, SkolemTerm>&)>& emit) {
    std::map<Variable, SkolemTerm> th;
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == body.size()) {
            emit(th);
            return;
        }
        const Atom& b = body[i];
        for (const auto& f : facts) {
            if (f.pred != b.pred) continue;
            std::vector<Variable> bound;
            bool ok = true;
            for (size_t j = 0; j < b.args.size() && ok; ++j) {
                auto it = th.find(b.args[j]);
                if (it == th.end()) {
                    if (f.args[j].depth() > k) {
                        ok = false;
                        break;
                    }
                    th.emplace(b.args[j], f.args[j]);
                    bound.push_back(b.args[j]);
                } else if (it->second != f.args[j]) {
                    ok = false;
                }
            }
            if (ok) rec(i + 1);
            for (const auto& v : bound) th.erase(v);
        }
    };
    rec(0);
}

}  // namespace

std::set<SkolemAtom> bounded_fixpoint(const LogicProgram& p, const Instance& d, size_t k,
                                      size_t max_atoms) {
    std::set<SkolemAtom> facts;
    for (const auto& a : d.atoms()) {
        SkolemAtom sa{a.pred, {}};
        for (const auto& v : a.args) sa.args.push_back(SkolemTerm::make_var(v));
        facts.insert(std::move(sa));
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : p.rules) {
            std::vector<SkolemAtom> fresh;
            match_body(r.body.atoms(), facts, k,
                       [&](const std::map<Variable, SkolemTerm>& th) {
                           for (const auto& h : r.head) {
                               SkolemAtom out = subst_atom(h, th);
                               if (!facts.count(out)) fresh.push_back(std::move(out));
                           }
                       });
            for (auto& f : fresh)
                if (facts.insert(std::move(f)).second) changed = true;
            if (facts.size() > max_atoms)
                throw std::runtime_error("bounded_fixpoint: atom budget exceeded");
        }
    }
    return facts;
}

bool skolem_entails(const std::set<SkolemAtom>& facts, const std::vector<Instance>& qs) {
    for (const auto& q : qs) {
        bool found = false;
        match_body(q.atoms(), facts, SIZE_MAX,
                   [&](const std::map<Variable, SkolemTerm>&) { found = true; });
        if (found) return true;
    }
    return false;
}

namespace {

std::set<Predicate> predicates_of(const DependencySet& sigma) {
    std::set<Predicate> out;
    auto scan = [&](const Instance& i) {
        for (const auto& a : i.atoms()) out.insert(a.pred);
    };
    for (const auto& r : sigma.tgds) {
        scan(r.body);
        scan(r.head);
    }
    for (const auto& r : sigma.egds) scan(r.body);
    return out;
}

// Splits repeated variable occurrences in the relational (non-E) part of the
// body, threading each split through an E atom.
Instance split_repeats(const Instance& body, const Predicate& e, FreshSupply& supply,
                       std::set<Variable>& avoid) {
    Instance cur = body;
    for (;;) {
        std::map<Variable, int> count;
        for (const auto& a : cur.atoms()) {
            if (a.pred == e) continue;
            for (const auto& v : a.args) ++count[v];
        }
        Variable target;
        bool found = false;
        for (const auto& a : cur.atoms()) {
            if (a.pred == e) continue;
            for (const auto& v : a.args)
                if (count[v] >= 2) {
                    target = v;
                    found = true;
                    break;
                }
            if (found) break;
        }
        if (!found) return cur;
        Variable fresh = supply.fresh(avoid, true);
        // replace the second occurrence of target in atom-order
        int seen = 0;
        Instance next;
        bool done = false;
        for (const auto& a : cur.atoms()) {
            if (a.pred == e) {
                next.insert(a);
                continue;
            }
            Atom b = a;
            if (!done) {
                for (auto& v : b.args) {
                    if (v != target) continue;
                    ++seen;
                    if (seen == 2) {
                        v = fresh;
                        done = true;
                        break;
                    }
                }
            }
            next.insert(b);
        }
        next.insert(Atom{e, {target, fresh}});
        cur = next;
    }
}

}  // namespace

Predicate sim_e_predicate(const DependencySet& sigma) {
    std::set<std::string> used;
    for (const auto& p : predicates_of(sigma)) used.insert(p.name);
    if (!used.count("E$")) return Predicate{"E$", 2};
    for (uint64_t n = 0;; ++n) {
        std::string name = "E$" + std::to_string(n);
        if (!used.count(name)) return Predicate{name, 2};
    }
}

std::vector<Tgd> sim_e(const DependencySet& sigma) {
    Predicate e = sim_e_predicate(sigma);
    Variable x{"x"}, y{"y"}, z{"z"};
    std::vector<Tgd> out;
    FreshSupply supply("_e");

    auto split = [&](const Instance& body, const std::set<Variable>& rule_vars) {
        std::set<Variable> avoid = rule_vars;
        return split_repeats(body, e, supply, avoid);
    };
    for (const auto& r : sigma.tgds) out.push_back(Tgd{split(r.body, r.vars()), r.head});

    out.push_back(Tgd{Instance({Atom{e, {x, y}}}), Instance({Atom{e, {y, x}}})});
    out.push_back(Tgd{Instance({Atom{e, {x, y}}, Atom{e, {y, z}}}), Instance({Atom{e, {x, z}}})});
    for (const auto& p : predicates_of(sigma)) {
        if (p.arity == 0) continue;
        Atom body{p, {}};
        Instance head;
        for (int i = 1; i <= p.arity; ++i) {
            Variable v{"x" + std::to_string(i)};
            body.args.push_back(v);
            head.insert(Atom{e, {v, v}});
        }
        out.push_back(Tgd{Instance({body}), head});
    }
    for (const auto& r : sigma.egds) {
        std::set<Variable> rv = r.body.vars();
        out.push_back(Tgd{split(r.body, rv), Instance({Atom{e, {r.lhs, r.rhs}}})});
    }
    return out;
}

bool weak_acyclicity(const std::vector<Tgd>& sigma) {
    using Position = std::pair<Predicate, int>;
    std::set<std::pair<Position, Position>> regular, special;
    for (const auto& r : sigma) {
        auto fr = r.frontier();
        auto ex = r.existential();
        std::map<Variable, std::vector<Position>> body_pos, head_pos;
        for (const auto& a : r.body.atoms())
            for (size_t i = 0; i < a.args.size(); ++i)
                body_pos[a.args[i]].push_back({a.pred, (int)i + 1});
        for (const auto& a : r.head.atoms())
            for (size_t i = 0; i < a.args.size(); ++i)
                head_pos[a.args[i]].push_back({a.pred, (int)i + 1});
        for (const auto& x : fr) {
            for (const auto& p : body_pos[x]) {
                for (const auto& q : head_pos[x]) regular.insert({p, q});
                for (const auto& z : ex)
                    for (const auto& q : head_pos[z]) special.insert({p, q});
            }
        }
    }
    std::map<Position, std::set<Position>> adj;
    for (const auto& [u, v] : regular) adj[u].insert(v);
    for (const auto& [u, v] : special) adj[u].insert(v);
    auto reaches = [&](const Position& from, const Position& to) {
        std::set<Position> seen{from};
        std::vector<Position> stack{from};
        while (!stack.empty()) {
            Position p = stack.back();
            stack.pop_back();
            if (p == to) return true;
            for (const auto& q : adj[p])
                if (seen.insert(q).second) stack.push_back(q);
        }
        return false;
    };
    for (const auto& [u, v] : special)
        if (reaches(v, u)) return false;
    return true;
}

size_t depth_bound(const std::vector<Tgd>& sigma) {
    if (!weak_acyclicity(sigma))
        throw std::invalid_argument("depth_bound: rules are not weakly acyclic");
    std::set<Predicate> preds = predicates_of(DependencySet{sigma, {}});
    Instance critical;
    Variable c{"_c"};
    for (const auto& p : preds) {
        Atom a{p, {}};
        for (int i = 0; i < p.arity; ++i) a.args.push_back(c);
        critical.insert(a);
    }
    auto facts = bounded_fixpoint(skolemize(sigma), critical, SIZE_MAX);
    size_t k = 1;
    for (const auto& f : facts)
        for (const auto& t : f.args) k = std::max(k, t.depth());
    return k;
}

namespace {

std::string shape_code(const SkolemTerm& t, std::map<Variable, int>& slot,
                       std::vector<Variable>& argvars) {
    if (t.is_var) {
        auto it = slot.find(t.var);
        if (it == slot.end()) {
            it = slot.emplace(t.var, (int)slot.size() + 1).first;
            argvars.push_back(t.var);
        }
        return std::to_string(it->second);
    }
    std::string s = t.fn + "(";
    for (size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ",";
        s += shape_code(t.args[i], slot, argvars);
    }
    return s + ")";
}

}  // namespace

Atom encode_skolem_atom(const SkolemAtom& a) {
    bool plain = true;
    for (const auto& t : a.args)
        if (!t.is_var) plain = false;
    if (plain) {
        Atom out{a.pred, {}};
        for (const auto& t : a.args) out.args.push_back(t.var);
        return out;
    }
    std::map<Variable, int> slot;
    std::vector<Variable> argvars;
    std::string code = "[";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) code += ",";
        code += shape_code(a.args[i], slot, argvars);
    }
    code += "]";
    return Atom{Predicate{a.pred.name + "@" + code, (int)argvars.size()}, argvars};
}

namespace {

// All term skeletons of depth <= bound over fns; leaves are placeholder vars.
std::vector<SkolemTerm> skeletons_up_to(const std::set<std::pair<std::string, int>>& fns,
                                        size_t bound) {
    std::vector<SkolemTerm> all{SkolemTerm::make_var(Variable{})};
    for (size_t d = 2; d <= bound; ++d) {
        std::vector<SkolemTerm> next{SkolemTerm::make_var(Variable{})};
        for (const auto& [name, arity] : fns) {
            std::vector<size_t> pick(arity, 0);
            if (arity == 0) {
                next.push_back(SkolemTerm::make_fn(name, {}));
                continue;
            }
            for (;;) {
                std::vector<SkolemTerm> args;
                for (size_t i : pick) args.push_back(all[i]);
                next.push_back(SkolemTerm::make_fn(name, std::move(args)));
                size_t i = 0;
                while (i < pick.size() && ++pick[i] == all.size()) pick[i++] = 0;
                if (i == pick.size()) break;
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        all = std::move(next);
    }
    return all;
}

size_t count_leaves(const SkolemTerm& t) {
    if (t.is_var) return 1;
    size_t n = 0;
    for (const auto& a : t.args) n += count_leaves(a);
    return n;
}

SkolemTerm fill_leaves(const SkolemTerm& t, const std::vector<Variable>& pool, size_t& next) {
    if (t.is_var) return SkolemTerm::make_var(pool[next++]);
    std::vector<SkolemTerm> args;
    for (const auto& a : t.args) args.push_back(fill_leaves(a, pool, next));
    return SkolemTerm::make_fn(t.fn, std::move(args));
}

void term_vars(const SkolemTerm& t, std::set<Variable>& out) {
    if (t.is_var) {
        out.insert(t.var);
        return;
    }
    for (const auto& a : t.args) term_vars(a, out);
}

bool has_fn(const SkolemTerm& t) { return !t.is_var; }

// Enumerates valuations of `vars` into skeleton instances, with leaf
// identification patterns (restricted growth strings) over the leaves that can
// influence a shape code, modulo leaf renaming. A leaf matters only when its
// variable occurs in some atom that contains a function symbol under the
// valuation; identifications among the remaining leaves produce rules that the
// distinct-leaf rule subsumes at evaluation time, so those stay distinct.
// Given one skeleton per variable, enumerates the leaf identification
// patterns that can influence a shape code. Merging two leaves changes a
// shape only when they meet inside a function-carrying atom, so the needed
// patterns are exactly the partitions into co-occurrence-connected classes;
// everything else stays pairwise distinct and is subsumed at evaluation time.
void emit_identifications(const std::vector<Variable>& vars,
                          const std::vector<SkolemTerm>& skel_of_var,
                          const std::vector<SkolemAtom>& atoms, size_t cap, size_t& used,
                          const std::function<void(const std::map<Variable, SkolemTerm>&)>&
                              emit) {
    size_t nv = vars.size();
    std::vector<bool> relevant(nv, false);
    std::vector<std::vector<bool>> cooccur(nv, std::vector<bool>(nv, false));
    for (size_t i = 0; i < nv; ++i) cooccur[i][i] = true;
    for (const auto& atom : atoms) {
        std::set<Variable> avars;
        bool fn = false;
        for (const auto& t : atom.args) {
            term_vars(t, avars);
            if (has_fn(t)) fn = true;
        }
        std::vector<size_t> idx;
        for (const auto& v : avars) {
            auto it = std::find(vars.begin(), vars.end(), v);
            if (it == vars.end()) continue;
            idx.push_back(it - vars.begin());
            if (has_fn(skel_of_var[it - vars.begin()])) fn = true;
        }
        if (!fn) continue;
        for (size_t a : idx) {
            relevant[a] = true;
            for (size_t b : idx) cooccur[a][b] = true;
        }
    }
    std::vector<size_t> slot_owner;
    for (size_t i = 0; i < nv; ++i) {
        size_t n = count_leaves(skel_of_var[i]);
        for (size_t j = 0; j < n; ++j) slot_owner.push_back(i);
    }
    size_t leaves = slot_owner.size();
    std::vector<size_t> rel;
    for (size_t s = 0; s < leaves; ++s)
        if (relevant[slot_owner[s]]) rel.push_back(s);
    std::vector<int> assign(leaves);
    for (size_t s = 0; s < leaves; ++s) assign[s] = (int)(leaves + 1 + s);

    int next_class = 1;
    std::function<void(const std::vector<size_t>&)> part = [&](const std::vector<size_t>& rem) {
        if (rem.empty()) {
            if (++used > cap)
                throw std::runtime_error("datalog_from_depth: shape cap exceeded");
            std::vector<Variable> pool(leaves);
            for (size_t j = 0; j < leaves; ++j)
                pool[j] = Variable{"p" + std::to_string(assign[j])};
            std::map<Variable, SkolemTerm> th;
            size_t next = 0;
            for (size_t i = 0; i < nv; ++i)
                th.emplace(vars[i], fill_leaves(skel_of_var[i], pool, next));
            emit(th);
            return;
        }
        // classes containing rem[0]: connected subsets of rem, each
        // enumerated once via the banned-extension scheme
        std::vector<size_t> cls{rem[0]};
        std::function<void(std::vector<size_t>&, std::set<size_t>&)> grow =
            [&](std::vector<size_t>& S, std::set<size_t>& banned) {
                for (size_t s : S) assign[s] = next_class;
                ++next_class;
                std::vector<size_t> rest;
                for (size_t s : rem)
                    if (std::find(S.begin(), S.end(), s) == S.end()) rest.push_back(s);
                part(rest);
                --next_class;
                for (size_t s : S) assign[s] = (int)(leaves + 1 + s);
                std::vector<size_t> ext;
                for (size_t v : rem) {
                    if (banned.count(v) || std::find(S.begin(), S.end(), v) != S.end())
                        continue;
                    for (size_t s : S)
                        if (cooccur[slot_owner[s]][slot_owner[v]]) {
                            ext.push_back(v);
                            break;
                        }
                }
                std::set<size_t> banned2 = banned;
                for (size_t v : ext) {
                    S.push_back(v);
                    grow(S, banned2);
                    S.pop_back();
                    banned2.insert(v);
                }
            };
        std::set<size_t> banned;
        grow(cls, banned);
    };
    part(rel);
}

void for_each_valuation(const std::vector<Variable>& vars,
                        const std::vector<SkolemTerm>& skeletons,
                        const std::vector<SkolemAtom>& atoms, size_t cap, size_t& used,
                        const std::function<void(const std::map<Variable, SkolemTerm>&)>& emit) {
    if (vars.empty()) {
        if (++used > cap) throw std::runtime_error("datalog_from_depth: shape cap exceeded");
        emit({});
        return;
    }
    std::vector<size_t> choice(vars.size(), 0);
    for (;;) {
        std::vector<SkolemTerm> skel_of_var;
        for (size_t i = 0; i < vars.size(); ++i) skel_of_var.push_back(skeletons[choice[i]]);
        emit_identifications(vars, skel_of_var, atoms, cap, used, emit);
        size_t i = 0;
        while (i < choice.size() && ++choice[i] == skeletons.size()) choice[i++] = 0;
        if (i == choice.size()) break;
    }
}

std::string fresh_goal_name(const std::vector<Tgd>& sigma, const std::vector<Instance>& qs) {
    std::set<std::string> used;
    for (const auto& p : predicates_of(DependencySet{sigma, {}})) used.insert(p.name);
    for (const auto& q : qs)
        for (const auto& a : q.atoms()) used.insert(a.pred.name);
    if (!used.count("goal$")) return "goal$";
    for (uint64_t n = 0;; ++n) {
        std::string name = "goal$" + std::to_string(n);
        if (!used.count(name)) return name;
    }
}

SkolemTerm erase_leaves(const SkolemTerm& t) {
    if (t.is_var) return SkolemTerm::make_var(Variable{});
    std::vector<SkolemTerm> args;
    for (const auto& a : t.args) args.push_back(erase_leaves(a));
    return SkolemTerm::make_fn(t.fn, std::move(args));
}

void collect_fns(const SkolemTerm& t, std::set<std::pair<std::string, int>>& out) {
    if (t.is_var) return;
    out.insert({t.fn, (int)t.args.size()});
    for (const auto& a : t.args) collect_fns(a, out);
}

}  // namespace

DatalogRewriting datalog_from_depth(const std::vector<Tgd>& sigma,
                                    const std::vector<Instance>& qs, size_t k,
                                    size_t shape_cap) {
    if (k < 1) throw std::invalid_argument("datalog_from_depth: k must be at least 1");
    LogicProgram p = skolemize(sigma);
    std::set<std::pair<std::string, int>> fns;
    for (const auto& r : p.rules)
        for (const auto& h : r.head)
            for (const auto& t : h.args) collect_fns(t, fns);
    auto body_sk = skeletons_up_to(fns, k);

    DatalogRewriting rw;
    rw.goal_pred = Predicate{fresh_goal_name(sigma, qs), 0};
    rw.goal = Instance({Atom{rw.goal_pred, {}}});

    size_t used = 0;
    std::set<Tgd> prog;
    auto plain_atoms = [](const Instance& i) {
        std::vector<SkolemAtom> out;
        for (const auto& a : i.atoms()) {
            SkolemAtom sa{a.pred, {}};
            for (const auto& v : a.args) sa.args.push_back(SkolemTerm::make_var(v));
            out.push_back(std::move(sa));
        }
        return out;
    };
    // leaf-erased shapes a body rule can derive; query instantiations whose
    // function shapes fall outside this set can never fire
    std::set<SkolemAtom> derivable_sigs;
    for (const auto& r : p.rules) {
        auto vars = sorted_vars(r.body.vars());
        auto atoms = plain_atoms(r.body);
        atoms.insert(atoms.end(), r.head.begin(), r.head.end());
        for_each_valuation(vars, body_sk, atoms, shape_cap, used,
                           [&](const std::map<Variable, SkolemTerm>& th) {
                               Instance body, head;
                               for (const auto& a : r.body.atoms()) {
                                   SkolemAtom sa{a.pred, {}};
                                   for (const auto& v : a.args)
                                       sa.args.push_back(subst_term(SkolemTerm::make_var(v), th));
                                   body.insert(encode_skolem_atom(sa));
                               }
                               for (const auto& h : r.head) {
                                   SkolemAtom sa = subst_atom(h, th);
                                   bool fn = false;
                                   for (const auto& t : sa.args) fn = fn || !t.is_var;
                                   if (fn) {
                                       SkolemAtom sig{sa.pred, {}};
                                       for (const auto& t : sa.args)
                                           sig.args.push_back(erase_leaves(t));
                                       derivable_sigs.insert(sig);
                                   }
                                   head.insert(encode_skolem_atom(sa));
                               }
                               bool trivial = subset_atoms(head, body);
                               if (!trivial) prog.insert(canonical_tgd(Tgd{body, head}));
                           });
    }
    // a query atom with function shapes can only ever match facts some body
    // rule derives, so each atom picks its shape from derivable_sigs (or stays
    // all-plain); shared variables must agree on their skeleton across atoms
    std::map<Predicate, std::vector<SkolemAtom>> sigs_by_pred;
    for (const auto& sig : derivable_sigs) {
        bool shallow = true;
        for (const auto& t : sig.args)
            if (t.depth() > k + 1) shallow = false;
        if (shallow) sigs_by_pred[sig.pred].push_back(sig);
    }
    const SkolemTerm leaf = SkolemTerm::make_var(Variable{});
    for (const auto& q : qs) {
        if (q.empty()) continue;
        auto vars = sorted_vars(q.vars());
        auto atoms = plain_atoms(q);
        std::map<Variable, SkolemTerm> skel;
        auto emit_goal = [&](const std::map<Variable, SkolemTerm>& th) {
            Instance body;
            for (const auto& a : q.atoms()) {
                SkolemAtom sa{a.pred, {}};
                for (const auto& v : a.args)
                    sa.args.push_back(subst_term(SkolemTerm::make_var(v), th));
                body.insert(encode_skolem_atom(sa));
            }
            prog.insert(canonical_tgd(Tgd{body, rw.goal}));
        };
        std::function<void(size_t)> choose = [&](size_t ai) {
            if (ai == q.atoms().size()) {
                std::vector<SkolemTerm> skel_of_var;
                for (const auto& v : vars) {
                    auto it = skel.find(v);
                    skel_of_var.push_back(it == skel.end() ? leaf : it->second);
                }
                emit_identifications(vars, skel_of_var, atoms, shape_cap, used, emit_goal);
                return;
            }
            const Atom& a = q.atoms()[ai];
            std::vector<SkolemAtom> candidates;
            SkolemAtom plain{a.pred, {}};
            for (int j = 0; j < a.pred.arity; ++j) plain.args.push_back(leaf);
            candidates.push_back(plain);
            auto it = sigs_by_pred.find(a.pred);
            if (it != sigs_by_pred.end())
                candidates.insert(candidates.end(), it->second.begin(), it->second.end());
            for (const auto& cand : candidates) {
                std::vector<Variable> bound;
                bool ok = true;
                for (size_t j = 0; j < a.args.size() && ok; ++j) {
                    auto cur = skel.find(a.args[j]);
                    if (cur == skel.end()) {
                        skel.emplace(a.args[j], cand.args[j]);
                        bound.push_back(a.args[j]);
                    } else if (cur->second != cand.args[j]) {
                        ok = false;
                    }
                }
                if (ok) choose(ai + 1);
                for (const auto& v : bound) skel.erase(v);
            }
        };
        choose(0);
    }
    // drop rules depending on auxiliary facts nothing derives, to a fixpoint
    std::vector<Tgd> live(prog.begin(), prog.end());
    for (bool changed = true; changed;) {
        changed = false;
        std::set<Predicate> heads;
        for (const auto& r : live)
            for (const auto& a : r.head.atoms()) heads.insert(a.pred);
        std::vector<Tgd> keep;
        for (const auto& r : live) {
            bool dead = false;
            for (const auto& a : r.body.atoms())
                if (a.pred.name.find('@') != std::string::npos && !heads.count(a.pred))
                    dead = true;
            if (dead)
                changed = true;
            else
                keep.push_back(r);
        }
        live = std::move(keep);
    }
    rw.program = std::move(live);
    rw.auxiliary.insert(rw.goal_pred);
    for (const auto& r : rw.program) {
        for (const auto& a : r.body.atoms())
            if (a.pred.name.find('@') != std::string::npos) rw.auxiliary.insert(a.pred);
        for (const auto& a : r.head.atoms())
            if (a.pred.name.find('@') != std::string::npos) rw.auxiliary.insert(a.pred);
    }
    return rw;
}

DatalogRewriting datalog_from_queries(const std::vector<Instance>& rewriting) {
    DatalogRewriting rw;
    rw.goal_pred = Predicate{fresh_goal_name({}, rewriting), 0};
    rw.goal = Instance({Atom{rw.goal_pred, {}}});
    rw.auxiliary.insert(rw.goal_pred);
    std::set<Tgd> prog;
    for (const auto& r : rewriting)
        if (!r.empty()) prog.insert(canonical_tgd(Tgd{r, rw.goal}));
    rw.program.assign(prog.begin(), prog.end());
    return rw;
}

bool answer_via_datalog(const Instance& d, const DatalogRewriting& rw, size_t max_atoms) {
    for (const auto& a : d.atoms())
        if (rw.auxiliary.count(a.pred))
            throw std::invalid_argument("answer_via_datalog: input mentions auxiliary predicate");
    Instance facts = d;
    std::set<Predicate> delta;
    for (const auto& a : facts.atoms()) delta.insert(a.pred);
    while (!delta.empty()) {
        Instance fresh;
        for (const auto& r : rw.program) {
            bool touched = false;
            for (const auto& a : r.body.atoms())
                if (delta.count(a.pred)) touched = true;
            if (!touched) continue;
            bool hit = false;
            for (const auto& th : homomorphisms(r.body, facts, SIZE_MAX, 5000000, &hit)) {
                Instance h = apply_renaming(r.head, th);
                for (const auto& a : h.atoms())
                    if (!facts.contains(a)) fresh.insert(a);
            }
            if (hit) throw std::runtime_error("answer_via_datalog: match budget exceeded");
        }
        delta.clear();
        for (const auto& a : fresh.atoms()) {
            facts.insert(a);
            delta.insert(a.pred);
        }
        if (facts.size() > max_atoms)
            throw std::runtime_error("answer_via_datalog: atom budget exceeded");
    }
    return subset_atoms(rw.goal, facts);
}

GuardReport guard_report(const Tgd& r) {
    GuardReport g;
    g.lw = r.body.size();
    auto fr = r.frontier();
    auto bv = r.body.vars();
    size_t best = SIZE_MAX;
    for (const auto& guard : r.body.atoms()) {
        std::set<Variable> gv(guard.args.begin(), guard.args.end());
        bool has_frontier = std::includes(gv.begin(), gv.end(), fr.begin(), fr.end());
        bool has_all = std::includes(gv.begin(), gv.end(), bv.begin(), bv.end());
        if (has_all) g.beta_guarded = true;
        if (!has_frontier) continue;
        g.guarded = true;
        // connected components of the remaining atoms through non-guard vars
        std::vector<Atom> rest;
        for (const auto& a : r.body.atoms())
            if (a != guard) rest.push_back(a);
        std::vector<size_t> parent(rest.size());
        for (size_t i = 0; i < rest.size(); ++i) parent[i] = i;
        std::function<size_t(size_t)> find = [&](size_t i) {
            return parent[i] == i ? i : parent[i] = find(parent[i]);
        };
        for (size_t i = 0; i < rest.size(); ++i)
            for (size_t j = i + 1; j < rest.size(); ++j)
                for (const auto& v : rest[i].args)
                    if (!gv.count(v) &&
                        std::find(rest[j].args.begin(), rest[j].args.end(), v) !=
                            rest[j].args.end())
                        parent[find(i)] = find(j);
        std::map<size_t, Instance> blocks;
        for (size_t i = 0; i < rest.size(); ++i) blocks[find(i)].insert(rest[i]);
        size_t widest = 0;
        for (const auto& [root, block] : blocks) widest = std::max(widest, block.size());
        size_t k = 1 + widest;
        if (k < best) {
            best = k;
            std::vector<Instance> bs;
            for (auto& [root, block] : blocks) bs.push_back(block);
            std::sort(bs.begin(), bs.end());
            g.decomposition = {guard, std::move(bs)};
        }
    }
    if (g.guarded) g.gw = best;
    return g;
}

std::vector<Instance> left_core_projections(const Tgd& r) {
    auto yset = r.body_only();
    std::vector<Variable> ys(yset.begin(), yset.end());
    auto pool = sorted_vars(r.body.vars());
    std::vector<Instance> images;
    std::vector<size_t> pick(ys.size(), 0);
    for (;;) {
        Renaming th;
        for (size_t i = 0; i < ys.size(); ++i) th.set(ys[i], pool[pick[i]]);
        Instance img = apply_renaming(r.body, th);
        if (subset_atoms(img, r.body)) images.push_back(std::move(img));
        if (ys.empty()) break;
        size_t i = 0;
        while (i < pick.size() && ++pick[i] == pool.size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    // keep the subset-minimal images, one per isomorphism class
    std::sort(images.begin(), images.end());
    images.erase(std::unique(images.begin(), images.end()), images.end());
    std::vector<Instance> minimal;
    for (const auto& a : images) {
        bool dominated = false;
        for (const auto& b : images)
            if (b != a && subset_atoms(b, a)) dominated = true;
        if (!dominated) minimal.push_back(a);
    }
    std::set<Instance> seen;
    std::vector<Instance> out;
    for (const auto& m : minimal)
        if (seen.insert(canonical(m)).second) out.push_back(m);
    return out;
}

std::vector<Tgd> derive_tgd(const Tgd& r1, const Tgd& r2in) {
    FreshSupply supply("_d");
    Tgd r2 = rename_apart(r2in, r1.vars(), supply);
    const auto& h1 = r1.head.atoms();
    const auto& b2 = r2.body.atoms();
    if (b2.empty() || b2.size() > 16) return {};
    auto z1 = r1.existential();
    auto x1 = r1.frontier();

    std::set<Tgd> out;
    for (unsigned mask = 1; mask < (1u << b2.size()); ++mask) {
        std::vector<size_t> sel;
        for (size_t j = 0; j < b2.size(); ++j)
            if (mask & (1u << j)) sel.push_back(j);
        std::vector<std::vector<size_t>> cand(sel.size());
        bool feasible = true;
        for (size_t s = 0; s < sel.size() && feasible; ++s) {
            for (size_t h = 0; h < h1.size(); ++h)
                if (h1[h].pred == b2[sel[s]].pred) cand[s].push_back(h);
            if (cand[s].empty()) feasible = false;
        }
        if (!feasible) continue;
        std::vector<size_t> pick(sel.size(), 0);
        for (;;) {
            // union-find over variables of H1 and the selected atoms
            std::map<Variable, Variable> parent;
            std::function<Variable(Variable)> find = [&](Variable v) {
                auto it = parent.find(v);
                if (it == parent.end() || it->second == v) return v;
                Variable root = find(it->second);
                parent[v] = root;
                return root;
            };
            auto unite = [&](const Variable& a, const Variable& b) {
                Variable ra = find(a), rb = find(b);
                if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
            };
            for (size_t s = 0; s < sel.size(); ++s) {
                const Atom& qa = b2[sel[s]];
                const Atom& ha = h1[cand[s][pick[s]]];
                for (size_t i = 0; i < qa.args.size(); ++i) unite(qa.args[i], ha.args[i]);
            }
            std::map<Variable, std::vector<Variable>> classes;
            std::set<Variable> touched;
            for (size_t s = 0; s < sel.size(); ++s) {
                for (const auto& v : b2[sel[s]].args) touched.insert(v);
                for (const auto& v : h1[cand[s][pick[s]]].args) touched.insert(v);
            }
            for (const auto& v : touched) classes[find(v)].push_back(v);
            bool ok = true;
            Renaming th;
            for (const auto& [root, members] : classes) {
                std::vector<Variable> zs;
                bool has_frontier = false;
                for (const auto& v : members) {
                    if (z1.count(v)) zs.push_back(v);
                    if (x1.count(v)) has_frontier = true;
                }
                if (zs.size() >= 2 || (zs.size() == 1 && has_frontier)) {
                    ok = false;
                    break;
                }
                Variable rep = zs.size() == 1 ? zs[0] : *std::min_element(members.begin(),
                                                                          members.end());
                for (const auto& v : members)
                    if (v != rep) th.set(v, rep);
            }
            if (ok) {
                Instance b1t = apply_renaming(r1.body, th);
                Instance h1t = apply_renaming(r1.head, th);
                Instance b2t = apply_renaming(r2.body, th);
                Instance h2t = apply_renaming(r2.head, th);
                Instance s, rest;
                for (size_t j = 0; j < b2.size(); ++j) {
                    Atom a = apply_renaming(b2[j], th);
                    if (mask & (1u << j))
                        s.insert(a);
                    else
                        rest.insert(a);
                }
                Tgd r1t{b1t, h1t};
                Tgd r2t{b2t, h2t};
                auto sv = s.vars();
                for (const auto& v : r2t.frontier())
                    if (!sv.count(v)) ok = false;
                auto z1t = r1t.existential();
                auto y1t = r1t.body_only();
                for (const auto& v : rest.vars())
                    if (z1t.count(v) || y1t.count(v)) ok = false;
                if (z1t.size() != z1.size()) ok = false;
                if (ok) {
                    assert(subset_atoms(s, h1t));
                    out.insert(canonical_tgd(Tgd{union_atoms(b1t, rest),
                                                 union_atoms(h1t, h2t)}));
                }
            }
            size_t i = 0;
            while (i < pick.size() && ++pick[i] == cand[i].size()) pick[i++] = 0;
            if (i == pick.size()) break;
        }
    }
    return std::vector<Tgd>(out.begin(), out.end());
}

namespace {

// (left-core body, head subset of at most k atoms) representatives of a rule
std::vector<Tgd> reduce_rule(const Tgd& r, size_t k) {
    std::vector<Tgd> out;
    const auto& hs = r.head.atoms();
    if (hs.empty() || hs.size() > 16) return out;
    for (unsigned mask = 1; mask < (1u << hs.size()); ++mask) {
        if ((size_t)std::popcount(mask) > k) continue;
        Instance head;
        for (size_t j = 0; j < hs.size(); ++j)
            if (mask & (1u << j)) head.insert(hs[j]);
        Tgd sub{r.body, head};
        for (const auto& lc : left_core_projections(sub)) out.push_back(Tgd{lc, head});
    }
    return out;
}

}  // namespace

FlattenResult flatten_k(const std::vector<Tgd>& sigma, const std::vector<Instance>& qs,
                        const FlattenBudget& b) {
    for (const auto& r : sigma)
        if (!guard_report(r).guarded)
            throw std::invalid_argument("flatten_k: every rule must be guarded");

    size_t k = 1;
    for (const auto& q : qs) k = std::max(k, q.size());
    for (const auto& r : sigma)
        for (const auto& lc : left_core_projections(r)) k = std::max(k, lc.size());

    FlattenResult result;
    for (int restart = 0; restart < 10; ++restart) {
        std::set<Tgd> reps;
        std::vector<Tgd> work;
        auto add = [&](const Tgd& t) {
            Tgd c = canonical_tgd(t);
            if (reps.insert(c).second) work.push_back(c);
        };
        for (const auto& r : sigma) {
            add(r);
            for (const auto& rr : reduce_rule(r, k)) add(rr);
        }
        size_t derivations = 0;
        bool grown = false;
        result.complete = true;
        while (!work.empty() && !grown) {
            Tgd r1 = work.back();
            work.pop_back();
            for (const auto& r2 : sigma) {
                for (const auto& r3 : derive_tgd(r1, r2)) {
                    if (++derivations > b.max_derivations) {
                        result.complete = false;
                        work.clear();
                        break;
                    }
                    for (const auto& rr : reduce_rule(r3, k)) {
                        if (rr.body.size() > k) {
                            k = rr.body.size();
                            grown = true;
                        }
                        add(rr);
                    }
                    if (reps.size() > b.max_rules) {
                        result.complete = false;
                        work.clear();
                        break;
                    }
                }
                if (!result.complete || grown) break;
            }
        }
        if (!grown) {
            result.rules.assign(reps.begin(), reps.end());
            result.k = k;
            return result;
        }
    }
    result.complete = false;
    result.k = k;
    return result;
}

std::optional<Instance> flat_saturate(const Instance& d, const std::vector<Tgd>& sigma,
                                      const ChaseBudget& b) {
    auto dvars = d.vars();
    Instance cur = d;
    std::set<std::pair<size_t, std::vector<Variable>>> fired;
    FreshSupply supply("_fc");
    size_t steps = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < sigma.size(); ++i) {
            const Tgd& r = sigma[i];
            auto frontier = sorted_vars(r.frontier());
            for (const auto& th : homomorphisms(r.body, cur, SIZE_MAX)) {
                std::vector<Variable> img;
                bool flat = true;
                for (const auto& x : frontier) {
                    img.push_back(th(x));
                    if (!dvars.count(th(x))) flat = false;
                }
                if (!flat || fired.count({i, img})) continue;
                if (++steps > b.max_steps) return std::nullopt;
                Renaming full = th;
                std::set<Variable> avoid = cur.vars();
                for (const auto& v : r.vars()) avoid.insert(full(v));
                for (const auto& z : r.existential()) full.set(z, supply.fresh(avoid, true));
                cur.insert_all(apply_renaming(r.head, full));
                fired.insert({i, img});
                changed = true;
                if (cur.size() > b.max_atoms_per_instance) return std::nullopt;
            }
        }
    }
    return cur;
}

Certainty flat_chase(const Instance& d, const std::vector<Tgd>& sigma,
                     const std::vector<Instance>& qs, const ChaseBudget& b) {
    auto fix = flat_saturate(d, sigma, b);
    if (!fix) return Certainty::Unknown;
    return entails_any(*fix, qs) ? Certainty::Yes : Certainty::No;
}

DatalogRewriting guarded_datalog_rewriting(const std::vector<Tgd>& sigma,
                                           const std::vector<Instance>& qs,
                                           const FlattenBudget& fb, size_t shape_cap) {
    FlattenResult fr = flatten_k(sigma, qs, fb);
    if (!fr.complete)
        throw std::runtime_error("guarded_datalog_rewriting: flattening budget exhausted");
    return datalog_from_depth(fr.rules, qs, 1, shape_cap);
}

}  // namespace er
