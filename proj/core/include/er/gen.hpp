#pragma once

#include <functional>
#include <random>

#include "er/rules.hpp"

namespace er {

struct GenLimits {
    int max_predicates = 4;
    int max_arity = 3;
    int max_rules = 4;
    int max_db_atoms = 6;
    int max_query_atoms = 2;
};

// Target class for rejection sampling against the analyzers.
enum class RuleClass {
    Any,
    Lav,
    Lossless,
    Acyclic,
    Sticky,
    Guarded,
    WeaklyAcyclic,
    FdIntegrable,   // fds nonempty, integrate_all succeeds
    EgdTerminating  // egds nonempty over weakly acyclic tgds
};

struct GeneratedCase {
    std::vector<Tgd> tgds;
    std::vector<Egd> egds;
    std::vector<FunctionalDependency> fds;
    Instance database;               // ground: variables play the constants
    std::vector<Instance> queries;   // one boolean UCQ, clause per instance
};

// Deterministic for a given rng state; rejection-samples rule sets until the
// class analyzer accepts. Database and query atoms always fit the limits.
GeneratedCase generate_case(std::mt19937& rng, RuleClass cls, const GenLimits& lim = {});

// Greedily drops database atoms, then whole rules, then query clauses, while
// `failing` stays true; returns the smallest failing case found.
GeneratedCase shrink_case(const GeneratedCase& c,
                          const std::function<bool(const GeneratedCase&)>& failing);

}  // namespace er
