#include "er/model.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace er {

Renaming Renaming::then(const Renaming& next) const {
    std::map<Variable, Variable> out;
    for (const auto& [k, v] : support_) out[k] = next(v);
    for (const auto& [k, v] : next.support())
        if (!support_.count(k)) out[k] = v;
    return Renaming(std::move(out));
}

Instance::Instance(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end());
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool Instance::contains(const Atom& a) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), a);
}

void Instance::insert(const Atom& a) {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end() || *it != a) atoms_.insert(it, a);
}

void Instance::insert_all(const Instance& other) {
    for (const auto& a : other.atoms()) insert(a);
}

void Instance::erase(const Atom& a) {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it != atoms_.end() && *it == a) atoms_.erase(it);
}

std::set<Variable> Instance::vars() const {
    std::set<Variable> out;
    for (const auto& a : atoms_)
        for (const auto& v : a.args) out.insert(v);
    return out;
}

Atom apply_renaming(const Atom& a, const Renaming& t) {
    Atom out{a.pred, {}};
    out.args.reserve(a.args.size());
    for (const auto& v : a.args) out.args.push_back(t(v));
    return out;
}

Instance apply_renaming(const Instance& i, const Renaming& t) {
    std::vector<Atom> atoms;
    atoms.reserve(i.size());
    for (const auto& a : i.atoms()) atoms.push_back(apply_renaming(a, t));
    return Instance(std::move(atoms));
}

namespace {

struct HomSearch {
    const Instance& j;
    const Instance& i;
    size_t limit;
    size_t node_cap;

    std::vector<Variable> jvars;            // dense index for j's variables
    std::vector<Variable> ivars;            // dense index for i's variables
    std::map<Variable, int> jvar_index;
    std::map<Variable, int> ivar_index;
    std::vector<std::vector<int>> jatoms;   // arg variable indices per j-atom
    std::vector<std::vector<std::vector<int>>> candidates;  // per j-atom target arg indices
    std::vector<int> order;                 // processing order of j-atoms
    std::vector<int> binding;               // per j-var, i-var index or -1
    std::set<std::vector<int>> seen;
    std::vector<Renaming> found;
    size_t nodes = 0;
    bool capped = false;

    bool prepare() {
        for (const auto& v : j.vars()) {
            jvar_index[v] = (int)jvars.size();
            jvars.push_back(v);
        }
        for (const auto& v : i.vars()) {
            ivar_index[v] = (int)ivars.size();
            ivars.push_back(v);
        }
        binding.assign(jvars.size(), -1);
        for (const auto& a : j.atoms()) {
            std::vector<int> idx;
            for (const auto& v : a.args) idx.push_back(jvar_index.at(v));
            jatoms.push_back(std::move(idx));
            std::vector<std::vector<int>> cand;
            for (const auto& b : i.atoms())
                if (b.pred == a.pred) {
                    std::vector<int> targs;
                    for (const auto& v : b.args) targs.push_back(ivar_index.at(v));
                    cand.push_back(std::move(targs));
                }
            if (cand.empty()) return false;
            candidates.push_back(std::move(cand));
        }
        // most-constrained-first, preferring atoms connected to the prefix
        std::vector<bool> used(jatoms.size(), false);
        std::vector<bool> placed(jvars.size(), false);
        for (size_t step = 0; step < jatoms.size(); ++step) {
            int best = -1;
            std::pair<size_t, size_t> best_score{0, 0};
            for (size_t k = 0; k < jatoms.size(); ++k) {
                if (used[k]) continue;
                size_t bound = 0;
                for (int v : jatoms[k])
                    if (placed[v]) ++bound;
                std::pair<size_t, size_t> score{bound, SIZE_MAX - candidates[k].size()};
                if (best < 0 || score > best_score) {
                    best = (int)k;
                    best_score = score;
                }
            }
            used[best] = true;
            for (int v : jatoms[best]) placed[v] = true;
            order.push_back(best);
        }
        return true;
    }

    bool rec(size_t idx) {
        if (++nodes > node_cap) {
            capped = true;
            return false;
        }
        if (idx == order.size()) {
            if (seen.insert(binding).second) {
                Renaming r;
                for (size_t v = 0; v < jvars.size(); ++v) r.set(jvars[v], ivars[binding[v]]);
                found.push_back(std::move(r));
                if (found.size() >= limit) return false;
            }
            return true;
        }
        int atom = order[idx];
        const auto& vars = jatoms[atom];
        bool all_bound = true;
        for (int v : vars)
            if (binding[v] < 0) {
                all_bound = false;
                break;
            }
        if (all_bound) {
            Atom target{j.atoms()[atom].pred, {}};
            for (int v : vars) target.args.push_back(ivars[binding[v]]);
            if (i.contains(target)) return rec(idx + 1);
            return true;
        }
        for (const auto& targs : candidates[atom]) {
            std::vector<int> added;
            bool ok = true;
            for (size_t k = 0; k < vars.size(); ++k) {
                int v = vars[k];
                if (binding[v] < 0) {
                    binding[v] = targs[k];
                    added.push_back(v);
                } else if (binding[v] != targs[k]) {
                    ok = false;
                    break;
                }
            }
            if (ok && !rec(idx + 1)) {
                for (int v : added) binding[v] = -1;
                return false;
            }
            for (int v : added) binding[v] = -1;
        }
        return true;
    }
};

}  // namespace

std::vector<Renaming> homomorphisms(const Instance& j, const Instance& i, size_t limit,
                                    size_t node_cap, bool* hit_cap) {
    if (hit_cap) *hit_cap = false;
    if (limit == 0) return {};
    if (j.empty()) return {Renaming{}};
    HomSearch s{j, i, limit, node_cap};
    if (s.prepare()) s.rec(0);
    if (hit_cap) *hit_cap = s.capped;
    return std::move(s.found);
}

bool entails(const Instance& i, const Instance& j) {
    return !homomorphisms(j, i, 1).empty();
}

bool entails_any(const Instance& i, const std::vector<Instance>& js) {
    for (const auto& j : js)
        if (entails(i, j)) return true;
    return false;
}

namespace {

// Canonical labelling by colour refinement with individualization. Isomorphic
// instances produce identical canonical atom lists because every step depends
// only on structure, and remaining ties are resolved by taking the minimum
// serialization over all branches.
struct CanonSearch {
    const Instance& inst;
    std::vector<Variable> vars;
    std::map<Variable, size_t> var_index;
    size_t n = 0;
    size_t leaves = 0;
    std::map<Predicate, size_t> pred_index;
    static constexpr size_t kLeafCap = 20000;

    std::optional<std::vector<Atom>> best;
    std::vector<size_t> best_rank;  // rank per var index for the best leaf

    explicit CanonSearch(const Instance& i) : inst(i) {
        for (const auto& v : i.vars()) {
            var_index[v] = vars.size();
            vars.push_back(v);
        }
        n = vars.size();
        for (const auto& a : i.atoms()) pred_index.emplace(a.pred, 0);
        size_t p = 0;
        for (auto& [pred, idx] : pred_index) idx = p++;
    }

    std::vector<size_t> refine(std::vector<size_t> colors) const {
        while (true) {
            // signature per variable: old color + sorted occurrence descriptors
            std::vector<std::pair<std::vector<size_t>, size_t>> sig(n);
            for (size_t v = 0; v < n; ++v) sig[v].second = v;
            std::vector<std::vector<std::vector<size_t>>> occ(n);
            for (const auto& a : inst.atoms()) {
                for (size_t k = 0; k < a.args.size(); ++k) {
                    size_t v = var_index.at(a.args[k]);
                    std::vector<size_t> d;
                    d.push_back(pred_index.at(a.pred));
                    d.push_back(a.args.size());
                    d.push_back(k);
                    for (const auto& w : a.args) d.push_back(colors[var_index.at(w)]);
                    occ[v].push_back(std::move(d));
                }
            }
            for (size_t v = 0; v < n; ++v) {
                std::sort(occ[v].begin(), occ[v].end());
                std::vector<size_t> flat{colors[v]};
                for (const auto& d : occ[v]) {
                    flat.push_back(d.size());
                    flat.insert(flat.end(), d.begin(), d.end());
                }
                sig[v].first = std::move(flat);
            }
            std::vector<std::pair<std::vector<size_t>, size_t>> sorted = sig;
            std::sort(sorted.begin(), sorted.end());
            std::vector<size_t> fresh(n);
            size_t color = 0;
            for (size_t k = 0; k < n; ++k) {
                if (k > 0 && sorted[k].first != sorted[k - 1].first) ++color;
                fresh[sorted[k].second] = color;
            }
            if (fresh == colors) return colors;
            colors = std::move(fresh);
        }
    }

    void search(std::vector<size_t> colors, std::vector<size_t>& rank, size_t next_rank) {
        if (next_rank == n) {
            ++leaves;
            std::vector<Atom> atoms;
            atoms.reserve(inst.size());
            for (const auto& a : inst.atoms()) {
                Atom out{a.pred, {}};
                for (const auto& v : a.args)
                    out.args.push_back(Variable{"v" + std::to_string(rank[var_index.at(v)])});
                atoms.push_back(std::move(out));
            }
            std::sort(atoms.begin(), atoms.end());
            atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
            if (!best || atoms < *best) {
                best = atoms;
                best_rank = rank;
            }
            return;
        }
        // smallest color among unranked variables
        size_t target = SIZE_MAX;
        for (size_t v = 0; v < n; ++v)
            if (rank[v] == SIZE_MAX) target = std::min(target, colors[v]);
        std::vector<size_t> klass;
        for (size_t v = 0; v < n; ++v)
            if (rank[v] == SIZE_MAX && colors[v] == target) klass.push_back(v);
        for (size_t v : klass) {
            rank[v] = next_rank;
            std::vector<size_t> c2 = colors;
            c2[v] = n + next_rank;  // individualize
            search(refine(std::move(c2)), rank, next_rank + 1);
            rank[v] = SIZE_MAX;
            if (leaves >= kLeafCap) break;
        }
    }

    std::pair<Instance, Renaming> run() {
        if (n == 0) return {inst, Renaming{}};
        std::vector<size_t> rank(n, SIZE_MAX);
        search(refine(std::vector<size_t>(n, 0)), rank, 0);
        // renumber by first occurrence in the winning sorted atom list
        std::map<Variable, Variable> renumber;
        size_t next = 0;
        for (const auto& a : *best)
            for (const auto& v : a.args)
                if (!renumber.count(v)) renumber[v] = Variable{"v" + std::to_string(next++)};
        Renaming renum{renumber};
        std::vector<Atom> atoms;
        for (const auto& a : *best) atoms.push_back(apply_renaming(a, renum));
        std::map<Variable, Variable> total;
        for (size_t v = 0; v < n; ++v)
            total[vars[v]] = renum(Variable{"v" + std::to_string(best_rank[v])});
        return {Instance(std::move(atoms)), Renaming(std::move(total))};
    }
};

}  // namespace

std::pair<Instance, Renaming> canonicalize(const Instance& i) {
    return CanonSearch(i).run();
}

Instance canonical(const Instance& i) {
    return canonicalize(i).first;
}

Variable FreshSupply::fresh(const std::set<Variable>& avoid) {
    while (true) {
        Variable v{prefix_ + std::to_string(counter_++)};
        if (!avoid.count(v)) return v;
    }
}

Variable FreshSupply::fresh(std::set<Variable>& avoid, bool extend_avoid) {
    Variable v = fresh(static_cast<const std::set<Variable>&>(avoid));
    if (extend_avoid) avoid.insert(v);
    return v;
}

std::string to_string(const Atom& a) {
    std::ostringstream os;
    os << a.pred.name << "(";
    for (size_t k = 0; k < a.args.size(); ++k) {
        if (k) os << ",";
        os << a.args[k].name;
    }
    os << ")";
    return os.str();
}

std::string to_string(const Instance& i) {
    std::ostringstream os;
    os << "{";
    for (size_t k = 0; k < i.atoms().size(); ++k) {
        if (k) os << ", ";
        os << to_string(i.atoms()[k]);
    }
    os << "}";
    return os.str();
}

}  // namespace er
