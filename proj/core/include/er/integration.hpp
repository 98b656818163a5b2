#pragma once

#include <map>

#include "er/chase.hpp"
#include "er/rules.hpp"

namespace er {

// No two atoms of alpha's predicate agree on every key position while
// differing on the target position.
bool fd_satisfied(const Instance& m, const FunctionalDependency& alpha);

struct InteractionReport {
    bool interacts = false;
    std::vector<std::pair<Tgd, Atom>> witnesses;  // (rule, head atom)
};

// A head atom of alpha's predicate whose key terms are all body variables
// while the target term is existential.
InteractionReport interacts(const FunctionalDependency& alpha, const std::vector<Tgd>& sigma);

struct IntegrationOutcome {
    std::vector<Tgd> rules;
    std::map<FunctionalDependency, std::pair<Predicate, Predicate>> fresh;  // alpha -> (F, D)
    bool success = false;
    // on failure: remaining interacting head atoms, or rules whose body
    // carries two conflicting F-atoms
    std::vector<std::pair<Tgd, Atom>> witnesses;
};

// One integration pass: axioms R_a -> F(key, target) and D(key) -> exists y
// F(key, y); each interacting head atom contributes an F-atom to its rule's
// body and a rule deriving D from the body as it stood before that F-atom.
// Succeeds when no interaction remains and every body determines the F target
// from the F key.
IntegrationOutcome integrate_one(const std::vector<Tgd>& sigma, const FunctionalDependency& alpha);

// Chains integrate_one over the dependencies, skipping ones that do not
// interact. All orders are tried when there are at most six dependencies
// (input order only beyond that); the first fully successful order wins,
// otherwise the longest successful prefix is reported.
IntegrationOutcome integrate_all(const std::vector<Tgd>& sigma,
                                 const std::vector<FunctionalDependency>& fds);

// Exhaustive application of the dependencies as egds (merging variables) until
// they all hold; always terminates.
Instance fd_closure(const Instance& d, const std::vector<FunctionalDependency>& fds);

// Certain answering through the integrated rule set: close d under the
// dependencies, then chase with the integrated tgds. Requires integrate_all
// to succeed (throws std::invalid_argument otherwise).
Certainty answer_with_integration(const Instance& d, const std::vector<Tgd>& sigma,
                                  const std::vector<FunctionalDependency>& fds,
                                  const std::vector<Instance>& qs, const ChaseBudget& b);

}  // namespace er
