#pragma once

#include "er/rules.hpp"

namespace er {

struct ChaseBudget {
    size_t max_steps = 10000;
    size_t max_atoms_per_instance = 1000;
    size_t max_instances = 1000;
};

enum class SaturationStatus { Fixpoint, BudgetExceeded };
enum class Certainty { Yes, No, Unknown };

struct SaturationResult {
    std::vector<Instance> instances;  // canonical, pairwise non-redundant
    SaturationStatus status = SaturationStatus::Fixpoint;
    size_t steps_used = 0;
};

// One canonicalized successor per applicable trigger, plus i itself.
std::vector<Instance> chase_successors(const Instance& i, const DependencySet& sigma);

// Saturation keeping homomorphically larger instances: a candidate J is
// discarded when some kept instance entails it; kept instances entailed by a
// surviving candidate are removed.
SaturationResult saturated_chase(const std::vector<Instance>& d, const DependencySet& sigma,
                                 const ChaseBudget& b);

Certainty certain_via_chase(const Instance& d, const DependencySet& sigma,
                            const std::vector<Instance>& qs, const ChaseBudget& b);

}  // namespace er
