#include "er/chase.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace er {

std::vector<Instance> chase_successors(const Instance& i, const DependencySet& sigma) {
    std::set<Instance> out;
    out.insert(canonical(i));
    for (const auto& tgd : sigma.tgds) {
        for (const auto& h : homomorphisms(tgd.body, i, SIZE_MAX)) {
            Renaming t = h;
            std::set<Variable> avoid = i.vars();
            FreshSupply supply("_c");
            for (const auto& z : tgd.existential()) t.set(z, supply.fresh(avoid, true));
            Instance j = i;
            j.insert_all(apply_renaming(tgd.head, t));
            out.insert(canonical(j));
        }
    }
    for (const auto& egd : sigma.egds) {
        for (const auto& h : homomorphisms(egd.body, i, SIZE_MAX)) {
            Variable a = h(egd.lhs), b = h(egd.rhs);
            if (a == b) continue;  // no-op trigger
            Renaming t;
            t.set(b, a);
            out.insert(canonical(apply_renaming(i, t)));
        }
    }
    return {out.begin(), out.end()};
}

namespace {

struct ChaseSaturator {
    const DependencySet& sigma;
    const ChaseBudget& budget;
    // returns true to stop early (certainty established)
    std::function<bool(const Instance&)> hit;

    std::vector<Instance> kept;
    std::deque<Instance> queue;
    std::set<Instance> seen;
    size_t steps = 0;
    bool exceeded = false;
    bool stopped = false;

    void add(const Instance& j) {
        if (j.size() > budget.max_atoms_per_instance) {
            exceeded = true;
            return;
        }
        for (const auto& k : kept)
            if (entails(k, j)) return;
        std::erase_if(kept, [&](const Instance& k) { return entails(j, k); });
        kept.push_back(j);
        if (kept.size() > budget.max_instances) {
            exceeded = true;
            return;
        }
        if (hit && hit(j)) {
            stopped = true;
            return;
        }
        if (seen.insert(j).second) queue.push_back(j);
    }

    SaturationResult run(const std::vector<Instance>& d) {
        for (const auto& i : d) {
            add(canonical(i));
            if (stopped || exceeded) break;
        }
        while (!stopped && !exceeded && !queue.empty()) {
            if (steps >= budget.max_steps) {
                exceeded = true;
                break;
            }
            Instance cur = std::move(queue.front());
            queue.pop_front();
            // pruned instances are simulated by whatever removed them
            bool live = std::find(kept.begin(), kept.end(), cur) != kept.end();
            if (!live) continue;
            ++steps;
            for (const auto& j : chase_successors(cur, sigma)) {
                if (j == cur) continue;
                add(j);
                if (stopped || exceeded) break;
            }
        }
        SaturationResult res;
        std::sort(kept.begin(), kept.end());
        res.instances = std::move(kept);
        res.status = exceeded ? SaturationStatus::BudgetExceeded : SaturationStatus::Fixpoint;
        res.steps_used = steps;
        return res;
    }
};

}  // namespace

SaturationResult saturated_chase(const std::vector<Instance>& d, const DependencySet& sigma,
                                 const ChaseBudget& b) {
    ChaseSaturator s{sigma, b, nullptr};
    return s.run(d);
}

Certainty certain_via_chase(const Instance& d, const DependencySet& sigma,
                            const std::vector<Instance>& qs, const ChaseBudget& b) {
    bool found = false;
    ChaseSaturator s{sigma, b,
                     [&](const Instance& inst) { return found = entails_any(inst, qs); }};
    SaturationResult res = s.run({d});
    if (found) return Certainty::Yes;
    if (res.status == SaturationStatus::Fixpoint) return Certainty::No;
    return Certainty::Unknown;
}

}  // namespace er
