#include "er/analysis.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace er {

namespace {

std::set<Position> positions_of(const Variable& v, const Instance& b) {
    std::set<Position> out;
    for (const auto& a : b.atoms())
        for (size_t k = 0; k < a.args.size(); ++k)
            if (a.args[k] == v) out.insert(Position{a.pred, (int)k + 1});
    return out;
}

bool subset(const std::set<Position>& small, const std::set<Position>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

ClassFlags classify(const std::vector<Tgd>& sigma) {
    ClassFlags f{true, true, true, true};
    // strict order on predicates with every head predicate below every body
    // predicate of the same rule; exists iff the head -> body digraph is a dag
    std::map<std::string, std::set<std::string>> succ;
    for (const auto& r : sigma) {
        if (r.body.size() > 1) f.lav = false;
        if (!r.existential().empty()) f.datalog = false;
        std::set<Variable> bv = r.body.vars();
        for (const auto& h : r.head.atoms()) {
            std::set<Variable> hv(h.args.begin(), h.args.end());
            if (!std::includes(hv.begin(), hv.end(), bv.begin(), bv.end()))
                f.lossless = false;
            for (const auto& b : r.body.atoms()) succ[h.pred.name].insert(b.pred.name);
        }
    }
    std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
    std::function<bool(const std::string&)> has_cycle = [&](const std::string& n) {
        state[n] = 1;
        for (const auto& m : succ[n]) {
            if (state[m] == 1) return true;
            if (state[m] == 0 && has_cycle(m)) return true;
        }
        state[n] = 2;
        return false;
    };
    for (const auto& [n, _] : succ)
        if (state[n] == 0 && has_cycle(n)) f.acyclic = false;
    return f;
}

std::vector<Tgd> gav_projections(const std::vector<Tgd>& sigma) {
    std::vector<Tgd> out;
    for (const auto& r : sigma)
        for (const auto& h : r.head.atoms()) out.push_back(Tgd{r.body, Instance({h})});
    return out;
}

std::set<Position> affected_positions(const std::vector<Tgd>& sigma) {
    std::vector<Tgd> projs = gav_projections(sigma);
    std::set<Position> aff;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : projs) {
            const Atom& h = p.head.atoms()[0];
            std::set<Variable> hv(h.args.begin(), h.args.end());
            for (const auto& v : p.body.vars()) {
                bool add = !hv.count(v) || subset(positions_of(v, p.head), aff);
                if (!add) continue;
                for (const auto& q : positions_of(v, p.body))
                    if (aff.insert(q).second) changed = true;
            }
        }
    }
    return aff;
}

StickinessReport is_sticky(const std::vector<Tgd>& sigma) {
    std::set<Position> aff = affected_positions(sigma);
    for (const auto& p : gav_projections(sigma)) {
        for (const auto& v : p.body.vars()) {
            if (!subset(positions_of(v, p.body), aff)) continue;
            size_t atoms_with_v = 0;
            for (const auto& a : p.body.atoms())
                if (std::find(a.args.begin(), a.args.end(), v) != a.args.end())
                    ++atoms_with_v;
            if (atoms_with_v > 1) return {false, StickinessWitness{p, v}};
        }
    }
    return {true, std::nullopt};
}

std::vector<Atom> simplifiable_atoms(const Tgd& r) {
    std::vector<Atom> out;
    std::set<Variable> hv = r.head.vars();
    for (const auto& a : r.body.atoms()) {
        Instance rest = r.body;
        rest.erase(a);
        std::set<Variable> rv = rest.vars();
        bool has_private = false, clash = false;
        for (const auto& v : a.args) {
            if (hv.count(v)) continue;
            has_private = true;
            if (rv.count(v)) clash = true;
        }
        if (has_private && !clash) out.push_back(a);
    }
    return out;
}

namespace {

struct VarUnion {
    std::map<Variable, Variable> parent;

    Variable find(const Variable& v) {
        auto it = parent.find(v);
        if (it == parent.end() || it->second == v) return v;
        Variable root = find(it->second);
        parent[v] = root;
        return root;
    }
    void unite(const Variable& a, const Variable& b) {
        Variable ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    void touch(const Variable& v) { parent.emplace(v, v); }
};

struct StepDetail {
    std::vector<Tgd> result;
    Predicate fresh;
    std::vector<Variable> xbar;
    size_t replaced_index = 0;
};

StepDetail do_simplify(const std::vector<Tgd>& sigma, size_t ri, const Atom& a) {
    StepDetail d;
    d.replaced_index = ri;
    std::set<Variable> hv = sigma[ri].head.vars();
    std::set<Variable> taken;
    for (const auto& v : a.args)
        if (hv.count(v) && taken.insert(v).second) d.xbar.push_back(v);

    std::set<std::string> names;
    for (const auto& r : sigma) {
        for (const auto& b : r.body.atoms()) names.insert(b.pred.name);
        for (const auto& h : r.head.atoms()) names.insert(h.pred.name);
    }
    uint64_t n = 0;
    while (names.count("simp$" + std::to_string(n))) ++n;
    d.fresh = Predicate{"simp$" + std::to_string(n), (int)d.xbar.size()};

    d.result = sigma;
    d.result[ri].body.erase(a);
    d.result[ri].body.insert(Atom{d.fresh, d.xbar});

    std::set<Tgd> have;
    for (const auto& r : d.result) have.insert(canonical_tgd(r));

    std::set<Variable> avars(a.args.begin(), a.args.end());
    size_t fixed = d.result.size();
    for (size_t k = 0; k < fixed; ++k) {
        FreshSupply supply("_s");
        Tgd rp = rename_apart(d.result[k], avars, supply);
        std::set<Variable> ex = rp.existential();
        for (const Atom& ha : rp.head.atoms()) {
            if (ha.pred != a.pred) continue;
            VarUnion u;
            for (const auto& v : avars) u.touch(v);
            for (const auto& v : rp.vars()) u.touch(v);
            for (size_t j = 0; j < a.args.size(); ++j) u.unite(a.args[j], ha.args[j]);
            // two distinct existentials can never be identified
            std::map<Variable, size_t> ex_per_class;
            bool ok = true;
            for (const auto& z : ex)
                if (++ex_per_class[u.find(z)] > 1) ok = false;
            if (!ok) continue;
            Renaming t;
            for (const auto& [v, _] : u.parent) t.set(v, u.find(v));
            Tgd nr;
            nr.body = apply_renaming(rp.body, t);
            Atom head{d.fresh, {}};
            for (const auto& x : d.xbar) head.args.push_back(t(x));
            nr.head = Instance({head});
            if (have.insert(canonical_tgd(nr)).second) d.result.push_back(nr);
        }
    }
    return d;
}

std::optional<std::pair<size_t, Atom>> first_simplifiable(const std::vector<Tgd>& sigma) {
    for (size_t i = 0; i < sigma.size(); ++i) {
        auto atoms = simplifiable_atoms(sigma[i]);
        if (!atoms.empty()) return {{i, atoms.front()}};
    }
    return std::nullopt;
}

}  // namespace

std::vector<Tgd> simplify_step(const std::vector<Tgd>& sigma, const Tgd& r, const Atom& a) {
    auto it = std::find(sigma.begin(), sigma.end(), r);
    if (it == sigma.end()) throw std::invalid_argument("rule not in the given set");
    auto atoms = simplifiable_atoms(r);
    if (std::find(atoms.begin(), atoms.end(), a) == atoms.end())
        throw std::invalid_argument("atom is not simplifiable in the rule");
    return do_simplify(sigma, (size_t)(it - sigma.begin()), a).result;
}

SimplificationResult simplify_fixpoint(const std::vector<Tgd>& sigma) {
    SimplificationResult out;
    out.simplified = sigma;
    constexpr size_t kStepCap = 10000;
    for (size_t step = 0; step < kStepCap; ++step) {
        auto pick = first_simplifiable(out.simplified);
        if (!pick) return out;
        auto [i, a] = *pick;
        Tgd before = out.simplified[i];
        StepDetail d = do_simplify(out.simplified, i, a);
        size_t vb = before.vars().size();
        size_t va = d.result[d.replaced_index].vars().size();
        if (va >= vb) throw std::logic_error("simplification did not shrink the rule");
        out.trace.push_back({before, a, d.fresh, vb, va});
        out.transfer.push_back(Tgd{Instance({a}), Instance({Atom{d.fresh, d.xbar}})});
        out.inverse.push_back(Tgd{Instance({Atom{d.fresh, d.xbar}}), Instance({a})});
        out.simplified = std::move(d.result);
    }
    throw std::logic_error("simplification exceeded the step cap");
}

}  // namespace er
