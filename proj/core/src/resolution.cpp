#include "er/resolution.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

namespace er {

namespace {

// Union-find over variables, with deterministic representative choice made at
// extraction time.
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

    std::map<Variable, std::vector<Variable>> classes() {
        std::map<Variable, std::vector<Variable>> out;
        for (const auto& [v, p] : parent) out[find(v)].push_back(v);
        return out;
    }
};

void factoring_resolvents(const Instance& q, std::set<Instance>& out) {
    const auto& atoms = q.atoms();
    for (size_t a = 0; a < atoms.size(); ++a) {
        for (size_t b = a + 1; b < atoms.size(); ++b) {
            if (atoms[a].pred != atoms[b].pred) continue;
            VarUnion u;
            for (const auto& v : q.vars()) u.touch(v);
            for (size_t k = 0; k < atoms[a].args.size(); ++k)
                u.unite(atoms[a].args[k], atoms[b].args[k]);
            Renaming t;
            for (const auto& v : q.vars()) t.set(v, u.find(v));
            out.insert(canonical(apply_renaming(q, t)));
        }
    }
}

void tgd_resolvents(const Instance& q, const Tgd& rule, std::set<Instance>& out, size_t& nodes,
                    size_t node_cap, bool& truncated) {
    FreshSupply supply("_r");
    Tgd r = rename_apart(rule, q.vars(), supply);
    const auto& qatoms = q.atoms();
    const auto& hatoms = r.head.atoms();
    std::set<Variable> existential = r.existential();
    std::set<Variable> rule_body_vars = r.body.vars();

    // occurrence map: variable -> set of q-atom indices
    std::map<Variable, std::set<size_t>> occ;
    for (size_t i = 0; i < qatoms.size(); ++i)
        for (const auto& v : qatoms[i].args) occ[v].insert(i);

    // assignment[i] in [-1, |H|): match q atom i to head atom, or leave free
    std::vector<int> assignment(qatoms.size(), -1);
    std::function<void(size_t)> enumerate = [&](size_t i) {
        if (truncated) return;
        if (++nodes > node_cap) {
            truncated = true;
            return;
        }
        if (i == qatoms.size()) {
            bool any = false;
            for (int a : assignment)
                if (a >= 0) any = true;
            if (!any) return;
            VarUnion u;
            for (const auto& v : q.vars()) u.touch(v);
            for (const auto& v : r.vars()) u.touch(v);
            for (size_t k = 0; k < qatoms.size(); ++k) {
                if (assignment[k] < 0) continue;
                const Atom& h = hatoms[assignment[k]];
                for (size_t j = 0; j < h.args.size(); ++j) u.unite(qatoms[k].args[j], h.args[j]);
            }
            // existential side conditions
            for (const auto& [root, members] : u.classes()) {
                std::vector<Variable> zs;
                for (const auto& v : members)
                    if (existential.count(v)) zs.push_back(v);
                if (zs.empty()) continue;
                if (zs.size() > 1) return;  // injectivity of theta_Z
                for (const auto& v : members) {
                    if (rule_body_vars.count(v)) return;  // z would land inside the result
                    if (occ.count(v)) {
                        // q-variable merged with an existential: all its
                        // occurrences must lie in the matched piece
                        for (size_t atom_idx : occ.at(v))
                            if (assignment[atom_idx] < 0) return;
                    }
                }
            }
            // representative per class: the existential if present, else min
            Renaming t;
            for (const auto& [root, members] : u.classes()) {
                Variable rep = *std::min_element(members.begin(), members.end());
                for (const auto& v : members)
                    if (existential.count(v)) rep = v;
                for (const auto& v : members) t.set(v, rep);
            }
            Instance qimg = apply_renaming(q, t);
            Instance himg = apply_renaming(r.head, t);
            Instance result;
            for (const auto& a : qimg.atoms())
                if (!himg.contains(a)) result.insert(a);
            result.insert_all(apply_renaming(r.body, t));
            out.insert(canonical(result));
            return;
        }
        enumerate(i + 1);
        for (size_t h = 0; h < hatoms.size(); ++h) {
            if (hatoms[h].pred != qatoms[i].pred) continue;
            assignment[i] = (int)h;
            enumerate(i + 1);
            assignment[i] = -1;
        }
    };
    enumerate(0);
}

void egd_resolvents(const Instance& q, const Egd& rule, std::set<Instance>& out, size_t& nodes,
                    size_t node_cap, bool& truncated) {
    FreshSupply supply("_r");
    std::set<Variable> qvars = q.vars();
    Egd e = rename_apart(rule, qvars, supply);
    std::set<Variable> avoid = qvars;
    for (const auto& v : e.body.vars()) avoid.insert(v);
    const auto& atoms = q.atoms();
    for (const auto& v : qvars) {
        // occurrences of v as (atom index, argument index)
        std::vector<std::pair<size_t, size_t>> occ;
        for (size_t i = 0; i < atoms.size(); ++i)
            for (size_t j = 0; j < atoms[i].args.size(); ++j)
                if (atoms[i].args[j] == v) occ.push_back({i, j});
        if (occ.size() < 2) continue;
        if (occ.size() > 20) {
            truncated = true;
            continue;
        }
        Variable w = supply.fresh(avoid);
        // proper non-empty subsets of the occurrences
        for (size_t mask = 1; mask + 1 < (size_t(1) << occ.size()); ++mask) {
            if (++nodes > node_cap) {
                truncated = true;
                break;
            }
            std::vector<Atom> renamed = atoms;
            for (size_t bit = 0; bit < occ.size(); ++bit)
                if (mask & (size_t(1) << bit)) renamed[occ[bit].first].args[occ[bit].second] = w;
            Instance result(std::move(renamed));
            Renaming t;
            t.set(e.lhs, v);
            t.set(e.rhs, w);
            result.insert_all(apply_renaming(e.body, t));
            out.insert(canonical(result));
        }
    }
}

}  // namespace

std::vector<Instance> resolvents(const Instance& q, const DependencySet& sigma, size_t node_cap,
                                 bool* truncated) {
    std::set<Instance> out;
    size_t nodes = 0;
    bool trunc = false;
    factoring_resolvents(q, out);
    for (const auto& r : sigma.tgds) tgd_resolvents(q, r, out, nodes, node_cap, trunc);
    for (const auto& e : sigma.egds) egd_resolvents(q, e, out, nodes, node_cap, trunc);
    if (truncated && trunc) *truncated = true;
    out.erase(canonical(q));
    return {out.begin(), out.end()};
}

namespace {

struct ResolutionSaturator {
    const DependencySet& sigma;
    const ResolutionBudget& budget;
    std::function<bool(const Instance&)> hit;

    std::vector<Instance> kept;
    std::deque<Instance> queue;
    std::set<Instance> seen;
    size_t steps = 0;
    bool exceeded = false;
    bool stopped = false;

    void add(const Instance& j) {
        if (j.size() > budget.max_atoms_per_query ||
            j.vars().size() > budget.max_vars_per_query) {
            exceeded = true;
            return;
        }
        // discard candidates some kept query maps into
        for (const auto& k : kept)
            if (entails(j, k)) return;
        std::erase_if(kept, [&](const Instance& k) { return entails(k, j); });
        kept.push_back(j);
        if (kept.size() > budget.max_resolvents) {
            exceeded = true;
            return;
        }
        if (hit && hit(j)) {
            stopped = true;
            return;
        }
        if (seen.insert(j).second) queue.push_back(j);
    }

    RewritingSet run(const std::vector<Instance>& qs) {
        for (const auto& q : qs) {
            add(canonical(q));
            if (stopped || exceeded) break;
        }
        while (!stopped && !exceeded && !queue.empty()) {
            if (steps >= budget.max_resolvents) {
                exceeded = true;
                break;
            }
            Instance cur = std::move(queue.front());
            queue.pop_front();
            bool live = std::find(kept.begin(), kept.end(), cur) != kept.end();
            if (!live) continue;
            ++steps;
            bool truncated = false;
            for (const auto& j : resolvents(cur, sigma, 200000, &truncated)) {
                add(j);
                if (stopped || exceeded) break;
            }
            if (truncated) exceeded = true;
        }
        RewritingSet res;
        std::sort(kept.begin(), kept.end());
        res.queries = std::move(kept);
        res.status = exceeded ? SaturationStatus::BudgetExceeded : SaturationStatus::Fixpoint;
        res.steps_used = steps;
        return res;
    }
};

}  // namespace

RewritingSet saturated_resolution(const std::vector<Instance>& qs, const DependencySet& sigma,
                                  const ResolutionBudget& b) {
    ResolutionSaturator s{sigma, b, nullptr};
    return s.run(qs);
}

Certainty certain_via_resolution(const Instance& d, const DependencySet& sigma,
                                 const std::vector<Instance>& qs, const ResolutionBudget& b) {
    bool found = false;
    ResolutionSaturator s{sigma, b, [&](const Instance& r) { return found = entails(d, r); }};
    RewritingSet res = s.run(qs);
    if (found) return Certainty::Yes;
    if (res.status == SaturationStatus::Fixpoint) return Certainty::No;
    return Certainty::Unknown;
}

}  // namespace er
