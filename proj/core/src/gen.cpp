#include "er/gen.hpp"

#include <stdexcept>

#include "er/analysis.hpp"
#include "er/datalog.hpp"
#include "er/integration.hpp"

namespace er {

namespace {

const char* kPredNames[] = {"A", "B", "C", "D"};

int pick(std::mt19937& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Variable var(const char* stem, int i) { return Variable{stem + std::to_string(i)}; }

Atom random_atom(std::mt19937& rng, const std::vector<Predicate>& preds, const char* stem,
                 int nvars) {
    const Predicate& p = preds[pick(rng, 0, (int)preds.size() - 1)];
    Atom a{p, {}};
    for (int i = 0; i < p.arity; ++i) a.args.push_back(var(stem, pick(rng, 1, nvars)));
    return a;
}

std::vector<Predicate> random_signature(std::mt19937& rng, const GenLimits& lim) {
    int n = pick(rng, 2, lim.max_predicates);
    std::vector<Predicate> preds;
    for (int i = 0; i < n; ++i)
        preds.push_back(Predicate{kPredNames[i], pick(rng, 1, lim.max_arity)});
    return preds;
}

// One candidate rule, biased toward the target class; rejection happens on
// the whole set afterwards.
std::optional<Tgd> random_rule(std::mt19937& rng, const std::vector<Predicate>& preds,
                               RuleClass cls) {
    Tgd r;
    int body_n = cls == RuleClass::Lav ? 1 : pick(rng, 1, 2);
    for (int i = 0; i < body_n; ++i) r.body.insert(random_atom(rng, preds, "x", 3));
    auto bvars = r.body.vars();
    std::vector<Variable> bv(bvars.begin(), bvars.end());

    // acyclicity bias: head predicates strictly below every body predicate in
    // name order
    std::vector<Predicate> head_preds = preds;
    if (cls == RuleClass::Acyclic) {
        std::string lo = r.body.atoms().front().pred.name;
        for (const auto& a : r.body.atoms()) lo = std::min(lo, a.pred.name);
        head_preds.clear();
        for (const auto& p : preds)
            if (p.name < lo) head_preds.push_back(p);
        if (head_preds.empty()) return std::nullopt;
    }

    // guardedness bias: universal head variables come from one body atom
    std::vector<Variable> universal = bv;
    if (cls == RuleClass::Guarded) {
        const auto& atoms = r.body.atoms();
        const Atom& g = atoms[pick(rng, 0, (int)atoms.size() - 1)];
        universal.assign(g.args.begin(), g.args.end());
        std::sort(universal.begin(), universal.end());
        universal.erase(std::unique(universal.begin(), universal.end()), universal.end());
    }

    int head_n = pick(rng, 1, 2);
    for (int i = 0; i < head_n; ++i) {
        const Predicate& p = head_preds[pick(rng, 0, (int)head_preds.size() - 1)];
        Atom a{p, {}};
        if (cls == RuleClass::Lossless) {
            if ((int)bv.size() > p.arity) return std::nullopt;
            for (const auto& v : bv) a.args.push_back(v);
            while ((int)a.args.size() < p.arity)
                a.args.push_back(pick(rng, 0, 1) ? bv[pick(rng, 0, (int)bv.size() - 1)]
                                                 : var("z", pick(rng, 1, 2)));
        } else {
            for (int j = 0; j < p.arity; ++j) {
                bool fresh = pick(rng, 0, 9) < 3;
                a.args.push_back(fresh || universal.empty()
                                     ? var("z", pick(rng, 1, 2))
                                     : universal[pick(rng, 0, (int)universal.size() - 1)]);
            }
        }
        r.head.insert(a);
    }
    if (r.head.empty() || r.body.empty()) return std::nullopt;
    return r;
}

std::optional<Egd> random_egd(std::mt19937& rng, const std::vector<Predicate>& preds) {
    Egd e;
    int n = pick(rng, 1, 2);
    for (int i = 0; i < n; ++i) e.body.insert(random_atom(rng, preds, "x", 3));
    auto vs = e.body.vars();
    if (vs.size() < 2) return std::nullopt;
    std::vector<Variable> v(vs.begin(), vs.end());
    int i = pick(rng, 0, (int)v.size() - 1);
    int j = pick(rng, 0, (int)v.size() - 2);
    if (j >= i) ++j;
    e.lhs = v[i];
    e.rhs = v[j];
    return e;
}

std::optional<FunctionalDependency> random_fd(std::mt19937& rng,
                                              const std::vector<Predicate>& preds) {
    std::vector<Predicate> wide;
    for (const auto& p : preds)
        if (p.arity >= 2) wide.push_back(p);
    if (wide.empty()) return std::nullopt;
    FunctionalDependency fd;
    fd.pred = wide[pick(rng, 0, (int)wide.size() - 1)];
    int target = pick(rng, 1, fd.pred.arity);
    for (int i = 1; i <= fd.pred.arity; ++i)
        if (i != target && (fd.key.empty() || pick(rng, 0, 1))) fd.key.push_back(i);
    if (fd.key.empty()) fd.key.push_back(target == 1 ? 2 : 1);
    fd.target = target;
    return fd;
}

bool accepts(RuleClass cls, const GeneratedCase& c) {
    switch (cls) {
        case RuleClass::Any:
            return true;
        case RuleClass::Lav:
            return classify(c.tgds).lav;
        case RuleClass::Lossless:
            return classify(c.tgds).lossless;
        case RuleClass::Acyclic:
            return classify(c.tgds).acyclic;
        case RuleClass::Sticky:
            return is_sticky(c.tgds).sticky;
        case RuleClass::Guarded:
            for (const auto& r : c.tgds)
                if (!guard_report(r).guarded) return false;
            return true;
        case RuleClass::WeaklyAcyclic:
            return weak_acyclicity(c.tgds);
        case RuleClass::EgdTerminating:
            return !c.egds.empty() && weak_acyclicity(c.tgds);
        case RuleClass::FdIntegrable: {
            if (c.fds.empty() || !weak_acyclicity(c.tgds)) return false;
            return integrate_all(c.tgds, c.fds).success;
        }
    }
    return false;
}

}  // namespace

GeneratedCase generate_case(std::mt19937& rng, RuleClass cls, const GenLimits& lim) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        GeneratedCase c;
        auto preds = random_signature(rng, lim);
        int nr = pick(rng, 1, lim.max_rules);
        bool bad = false;
        for (int i = 0; i < nr && !bad; ++i) {
            auto r = random_rule(rng, preds, cls);
            if (!r)
                bad = true;
            else
                c.tgds.push_back(std::move(*r));
        }
        if (bad) continue;
        if (cls == RuleClass::EgdTerminating) {
            int ne = pick(rng, 1, 2);
            for (int i = 0; i < ne && !bad; ++i) {
                auto e = random_egd(rng, preds);
                if (!e)
                    bad = true;
                else
                    c.egds.push_back(std::move(*e));
            }
        }
        if (cls == RuleClass::FdIntegrable) {
            int nf = pick(rng, 1, 2);
            for (int i = 0; i < nf && !bad; ++i) {
                auto fd = random_fd(rng, preds);
                if (!fd)
                    bad = true;
                else
                    c.fds.push_back(std::move(*fd));
            }
        }
        if (bad || !accepts(cls, c)) continue;

        int nd = pick(rng, 1, lim.max_db_atoms);
        std::vector<Atom> db;
        for (int i = 0; i < nd; ++i) db.push_back(random_atom(rng, preds, "c", 3));
        c.database = Instance(std::move(db));

        int nq = pick(rng, 1, lim.max_query_atoms);
        std::vector<Atom> q;
        for (int i = 0; i < nq; ++i) q.push_back(random_atom(rng, preds, "u", 3));
        c.queries.push_back(Instance(std::move(q)));
        return c;
    }
    throw std::runtime_error("generate_case: rejection sampling exhausted");
}

GeneratedCase shrink_case(const GeneratedCase& c,
                          const std::function<bool(const GeneratedCase&)>& failing) {
    GeneratedCase best = c;
    bool progress = true;
    while (progress) {
        progress = false;
        for (size_t i = 0; i < best.database.size(); ++i) {
            GeneratedCase t = best;
            std::vector<Atom> atoms = t.database.atoms();
            atoms.erase(atoms.begin() + i);
            t.database = Instance(std::move(atoms));
            if (failing(t)) {
                best = std::move(t);
                progress = true;
                break;
            }
        }
        if (progress) continue;
        for (size_t i = 0; i < best.tgds.size(); ++i) {
            GeneratedCase t = best;
            t.tgds.erase(t.tgds.begin() + i);
            if (failing(t)) {
                best = std::move(t);
                progress = true;
                break;
            }
        }
        if (progress) continue;
        for (size_t i = 0; i < best.egds.size(); ++i) {
            GeneratedCase t = best;
            t.egds.erase(t.egds.begin() + i);
            if (failing(t)) {
                best = std::move(t);
                progress = true;
                break;
            }
        }
        if (progress) continue;
        for (size_t i = 0; i < best.fds.size(); ++i) {
            GeneratedCase t = best;
            t.fds.erase(t.fds.begin() + i);
            if (failing(t)) {
                best = std::move(t);
                progress = true;
                break;
            }
        }
        if (progress) continue;
        if (best.queries.size() > 1) {
            for (size_t i = 0; i < best.queries.size(); ++i) {
                GeneratedCase t = best;
                t.queries.erase(t.queries.begin() + i);
                if (failing(t)) {
                    best = std::move(t);
                    progress = true;
                    break;
                }
            }
        }
    }
    return best;
}

}  // namespace er
