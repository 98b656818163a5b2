#pragma once

#include <optional>

#include "er/chase.hpp"
#include "er/data.hpp"
#include "er/resolution.hpp"

namespace er {

// Reserved names used by the encoding: constants become variables v$<label>
// tagged by const$<label> atoms, distinct hard constants get neq$ atoms in
// both orders, free variables get fv$<i> atoms, equalities become eq$ atoms.
Variable constant_var(const Constant& c);
Predicate constant_pred(const Constant& c);
inline const Predicate kNeq{"neq$", 2};
inline const Predicate kEq{"eq$", 2};
Predicate free_var_pred(size_t i);  // 1-based

Instance star_database(const Database& d);
std::vector<Instance> star_query(const UCQEqQuery& q);

// Inverse translation: const$<label>(u) becomes u = label (or the constant is
// substituted back when u is its own encoding variable), fv$<i>(u) becomes
// u = x_i (dropped when u already is x_i), eq$ becomes an equality atom.
UCQEqQuery unstar_rewriting(const std::vector<Instance>& rs,
                            const std::vector<Variable>& free_vars);

enum class Satisfiability { Sat, Unsat, Unknown };

// Unsat iff the encoded database certainly derives neq$(x,x).
Satisfiability satisfiable(const Database& d, const DependencySet& sigma, const ChaseBudget& b);

// Certain answers as tuples over the constants of the database and query.
// Tries a resolution rewriting of the encoded query first and evaluates it
// over the encoded database; falls back to chase-based answering per tuple.
// nullopt when both strategies run out of budget.
std::optional<std::vector<std::vector<Constant>>> certain_answers(const Database& d,
                                                                  const DependencySet& sigma,
                                                                  const UCQEqQuery& q,
                                                                  const ResolutionBudget& rb,
                                                                  const ChaseBudget& cb);

}  // namespace er
