#include "er/integration.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace er {

bool fd_satisfied(const Instance& m, const FunctionalDependency& alpha) {
    std::vector<const Atom*> rows;
    for (const auto& a : m.atoms())
        if (a.pred == alpha.pred) rows.push_back(&a);
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = i + 1; j < rows.size(); ++j) {
            bool keys_agree = true;
            for (int k : alpha.key)
                if (rows[i]->args[k - 1] != rows[j]->args[k - 1]) keys_agree = false;
            if (keys_agree && rows[i]->args[alpha.target - 1] != rows[j]->args[alpha.target - 1])
                return false;
        }
    }
    return true;
}

InteractionReport interacts(const FunctionalDependency& alpha, const std::vector<Tgd>& sigma) {
    InteractionReport rep;
    for (const auto& r : sigma) {
        std::set<Variable> bv = r.body.vars();
        for (const auto& h : r.head.atoms()) {
            if (h.pred != alpha.pred) continue;
            bool key_in_body = true;
            for (int k : alpha.key)
                if (!bv.count(h.args[k - 1])) key_in_body = false;
            if (key_in_body && !bv.count(h.args[alpha.target - 1])) {
                rep.interacts = true;
                rep.witnesses.push_back({r, h});
            }
        }
    }
    return rep;
}

namespace {

std::pair<Predicate, Predicate> fresh_fd_predicates(const std::vector<Tgd>& sigma,
                                                    size_t key_size) {
    std::set<std::string> names;
    for (const auto& r : sigma) {
        for (const auto& a : r.body.atoms()) names.insert(a.pred.name);
        for (const auto& a : r.head.atoms()) names.insert(a.pred.name);
    }
    uint64_t n = 0;
    while (names.count("fd$F$" + std::to_string(n)) || names.count("fd$D$" + std::to_string(n)))
        ++n;
    return {Predicate{"fd$F$" + std::to_string(n), (int)key_size + 1},
            Predicate{"fd$D$" + std::to_string(n), (int)key_size}};
}

Variable nth_var(int k) { return Variable{"x" + std::to_string(k)}; }

}  // namespace

IntegrationOutcome integrate_one(const std::vector<Tgd>& sigma,
                                 const FunctionalDependency& alpha) {
    IntegrationOutcome out;
    auto [fpred, dpred] = fresh_fd_predicates(sigma, alpha.key.size());
    out.fresh[alpha] = {fpred, dpred};

    std::vector<Tgd> rules = sigma;
    std::vector<Tgd> derive_d;
    for (auto& r : rules) {
        for (const auto& h : r.head.atoms()) {
            if (h.pred != alpha.pred) continue;
            std::set<Variable> bv = r.body.vars();  // including earlier F-atoms
            bool key_in_body = true;
            for (int k : alpha.key)
                if (!bv.count(h.args[k - 1])) key_in_body = false;
            if (!key_in_body || bv.count(h.args[alpha.target - 1])) continue;
            Atom d{dpred, {}};
            for (int k : alpha.key) d.args.push_back(h.args[k - 1]);
            derive_d.push_back(Tgd{r.body, Instance({d})});
            Atom f{fpred, d.args};
            f.args.push_back(h.args[alpha.target - 1]);
            r.body.insert(f);
        }
    }

    Atom full{alpha.pred, {}};
    for (int k = 1; k <= alpha.pred.arity; ++k) full.args.push_back(nth_var(k));
    Atom proj{fpred, {}};
    for (int k : alpha.key) proj.args.push_back(nth_var(k));
    proj.args.push_back(nth_var(alpha.target));
    rules.push_back(Tgd{Instance({full}), Instance({proj})});

    Atom dkey{dpred, {}};
    Atom fkey{fpred, {}};
    for (size_t k = 0; k < alpha.key.size(); ++k) {
        dkey.args.push_back(nth_var((int)k + 1));
        fkey.args.push_back(nth_var((int)k + 1));
    }
    fkey.args.push_back(Variable{"y"});
    rules.push_back(Tgd{Instance({dkey}), Instance({fkey})});

    rules.insert(rules.end(), derive_d.begin(), derive_d.end());

    out.rules = std::move(rules);
    InteractionReport rep = interacts(alpha, out.rules);
    out.witnesses = rep.witnesses;
    std::vector<int> fkeys((size_t)fpred.arity - 1);
    std::iota(fkeys.begin(), fkeys.end(), 1);
    FunctionalDependency body_fd{fpred, fkeys, fpred.arity};
    bool bodies_ok = true;
    for (const auto& r : out.rules) {
        if (fd_satisfied(r.body, body_fd)) continue;
        bodies_ok = false;
        for (const auto& a : r.body.atoms())
            if (a.pred == fpred) {
                out.witnesses.push_back({r, a});
                break;
            }
    }
    out.success = !rep.interacts && bodies_ok;
    return out;
}

IntegrationOutcome integrate_all(const std::vector<Tgd>& sigma,
                                 const std::vector<FunctionalDependency>& fds) {
    auto run_order = [&](const std::vector<size_t>& order) {
        IntegrationOutcome acc;
        acc.rules = sigma;
        acc.success = true;
        for (size_t idx : order) {
            const FunctionalDependency& alpha = fds[idx];
            if (!interacts(alpha, acc.rules).interacts) continue;
            IntegrationOutcome step = integrate_one(acc.rules, alpha);
            if (!step.success) {
                acc.success = false;
                acc.witnesses = step.witnesses;
                return acc;
            }
            acc.rules = std::move(step.rules);
            acc.fresh.insert(step.fresh.begin(), step.fresh.end());
        }
        for (const auto& alpha : fds) {
            InteractionReport rep = interacts(alpha, acc.rules);
            if (rep.interacts) {
                acc.success = false;
                acc.witnesses.insert(acc.witnesses.end(), rep.witnesses.begin(),
                                     rep.witnesses.end());
            }
        }
        return acc;
    };

    std::vector<size_t> order(fds.size());
    std::iota(order.begin(), order.end(), 0);
    if (fds.size() > 6) return run_order(order);

    IntegrationOutcome best;
    bool have_best = false;
    do {
        IntegrationOutcome got = run_order(order);
        if (got.success) return got;
        if (!have_best || got.fresh.size() > best.fresh.size()) {
            best = std::move(got);
            have_best = true;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    if (!have_best) {  // fds empty
        best.rules = sigma;
        best.success = true;
    }
    return best;
}

Instance fd_closure(const Instance& d, const std::vector<FunctionalDependency>& fds) {
    Instance cur = d;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& alpha : fds) {
            std::vector<const Atom*> rows;
            for (const auto& a : cur.atoms())
                if (a.pred == alpha.pred) rows.push_back(&a);
            for (size_t i = 0; i < rows.size() && !changed; ++i) {
                for (size_t j = i + 1; j < rows.size() && !changed; ++j) {
                    bool keys_agree = true;
                    for (int k : alpha.key)
                        if (rows[i]->args[k - 1] != rows[j]->args[k - 1]) keys_agree = false;
                    const Variable& a = rows[i]->args[alpha.target - 1];
                    const Variable& b = rows[j]->args[alpha.target - 1];
                    if (!keys_agree || a == b) continue;
                    Renaming t;
                    t.set(std::max(a, b), std::min(a, b));
                    cur = apply_renaming(cur, t);
                    changed = true;
                }
            }
            if (changed) break;
        }
    }
    return cur;
}

Certainty answer_with_integration(const Instance& d, const std::vector<Tgd>& sigma,
                                  const std::vector<FunctionalDependency>& fds,
                                  const std::vector<Instance>& qs, const ChaseBudget& b) {
    IntegrationOutcome integrated = integrate_all(sigma, fds);
    if (!integrated.success)
        throw std::invalid_argument("the functional dependencies cannot be integrated");
    Instance closed = fd_closure(d, fds);
    return certain_via_chase(closed, DependencySet{integrated.rules, {}}, qs, b);
}

}  // namespace er
