#pragma once

#include "er/chase.hpp"
#include "er/rules.hpp"

namespace er {

struct ResolutionBudget {
    size_t max_resolvents = 5000;
    size_t max_atoms_per_query = 100;
    size_t max_vars_per_query = 100;
};

struct RewritingSet {
    std::vector<Instance> queries;  // canonical, pairwise non-subsumed
    SaturationStatus status = SaturationStatus::Fixpoint;
    size_t steps_used = 0;
};

// One-step resolvents of a boolean query, canonicalized:
//  - factoring: merge two unifiable atoms of q (finite stand-in for arbitrary
//    renamings);
//  - tgd resolution: most-general piece unifications of a non-empty subset of
//    q with head atoms, rejected when a variable unified with an existential
//    occurs in q outside the matched piece;
//  - egd resolution: rename a proper non-empty subset of the occurrences of a
//    repeated variable to a fresh one and add the egd body.
// The node cap bounds the enumeration work; when it is hit, `truncated` (if
// given) is set and the result may be incomplete.
std::vector<Instance> resolvents(const Instance& q, const DependencySet& sigma,
                                 size_t node_cap = 200000, bool* truncated = nullptr);

// Saturation keeping most-general queries: a candidate is discarded when some
// kept query maps into it; kept queries that a surviving candidate maps into
// are removed.
RewritingSet saturated_resolution(const std::vector<Instance>& qs, const DependencySet& sigma,
                                  const ResolutionBudget& b);

Certainty certain_via_resolution(const Instance& d, const DependencySet& sigma,
                                 const std::vector<Instance>& qs, const ResolutionBudget& b);

}  // namespace er
