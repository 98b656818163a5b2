#pragma once

#include "er/model.hpp"

namespace er {

// B(X,Y) -> exists Z . H(X,Z). Frontier X, body-only Y, existential Z are
// derived from the variable sets.
struct Tgd {
    Instance body;
    Instance head;

    std::set<Variable> frontier() const;     // X
    std::set<Variable> body_only() const;    // Y
    std::set<Variable> existential() const;  // Z
    std::set<Variable> vars() const;

    auto operator<=>(const Tgd&) const = default;
};

// B -> lhs = rhs, with lhs, rhs in vars(body).
struct Egd {
    Instance body;
    Variable lhs;
    Variable rhs;

    auto operator<=>(const Egd&) const = default;
};

// R[K] -> target, positions 1-based.
struct FunctionalDependency {
    Predicate pred;
    std::vector<int> key;  // sorted ascending
    int target = 0;

    Egd as_egd() const;

    auto operator<=>(const FunctionalDependency&) const = default;
};

struct DependencySet {
    std::vector<Tgd> tgds;
    std::vector<Egd> egds;

    std::set<Variable> vars() const;
    bool empty() const { return tgds.empty() && egds.empty(); }

    auto operator<=>(const DependencySet&) const = default;
};

// Renames the rule's variables so none collides with `avoid`; fresh names drawn
// from the supply.
Tgd rename_apart(const Tgd& r, const std::set<Variable>& avoid, FreshSupply& supply);
Egd rename_apart(const Egd& r, const std::set<Variable>& avoid, FreshSupply& supply);

// Canonical form of a rule: body and head canonicalized together through a
// two-part instance so isomorphic rules compare equal.
Tgd canonical_tgd(const Tgd& r);

std::string to_string(const Tgd& r);
std::string to_string(const Egd& r);

}  // namespace er
