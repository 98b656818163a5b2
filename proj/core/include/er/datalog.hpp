#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "er/chase.hpp"
#include "er/rules.hpp"

namespace er {

// Term over variables and uninterpreted function symbols.
// depth(x) = 1, depth(f(t1..tn)) = 1 + max depth(ti) (1 for 0-ary f).
struct SkolemTerm {
    bool is_var = true;
    Variable var;
    std::string fn;
    std::vector<SkolemTerm> args;

    static SkolemTerm make_var(Variable v);
    static SkolemTerm make_fn(std::string fn, std::vector<SkolemTerm> args);

    size_t depth() const;

    std::strong_ordering operator<=>(const SkolemTerm& o) const;
    bool operator==(const SkolemTerm& o) const;
};

struct SkolemAtom {
    Predicate pred;
    std::vector<SkolemTerm> args;

    auto operator<=>(const SkolemAtom&) const = default;
};

// body(X,Y) -> head atoms whose arguments are frontier variables or f(X...).
struct LogicRule {
    Instance body;
    std::vector<SkolemAtom> head;

    auto operator<=>(const LogicRule&) const = default;
};

struct LogicProgram {
    std::vector<LogicRule> rules;
};

// One fresh symbol f1, f2, ... per (rule, existential variable); arguments are
// the frontier variables ordered by first occurrence in the head. Rules
// without existentials pass through unchanged.
LogicProgram skolemize(const std::vector<Tgd>& sigma);

// Least fixpoint of d under p restricted to body valuations binding every
// variable to a term of depth <= k. Monotone in k and order-independent.
std::set<SkolemAtom> bounded_fixpoint(const LogicProgram& p, const Instance& d, size_t k,
                                      size_t max_atoms = 100000);

// Some member of qs maps into the fact set (variables to arbitrary terms).
bool skolem_entails(const std::set<SkolemAtom>& facts, const std::vector<Instance>& qs);

// Smallest fresh binary predicate name E$, E$0, ... not occurring in sigma.
Predicate sim_e_predicate(const DependencySet& sigma);

// Equality-free simulation: symmetry/transitivity axioms for a fresh binary
// predicate E, per-predicate reflexivity rules, repeated body occurrences in
// relational atoms split through E, and each egd B -> x = y turned into the
// tgd B -> E(x,y).
std::vector<Tgd> sim_e(const DependencySet& sigma);

// Position dependency graph test: true iff no cycle goes through an edge
// created by an existential variable. Guarantees the skolemized fixpoint is
// finite on every finite input.
bool weak_acyclicity(const std::vector<Tgd>& sigma);

// Maximum term depth reached by the skolemized rules on the critical instance
// (one atom per predicate over a single shared variable). Requires
// weak_acyclicity(sigma).
size_t depth_bound(const std::vector<Tgd>& sigma);

struct DatalogRewriting {
    std::set<Predicate> auxiliary;
    std::vector<Tgd> program;  // full tgds: vars(head) within vars(body)
    Instance goal;             // single 0-ary goal atom
    Predicate goal_pred;
};

// Shape-encoded simulation of depth-bounded evaluation. Atoms whose arguments
// are all plain variables keep their original predicate; atoms containing
// function symbols use predicates named `<pred>@[shape,...]` whose arguments
// are the distinct leaf variables in first-occurrence order. Rule bodies are
// instantiated with valuations of depth <= k, query-to-goal rules with
// valuations of depth <= k+1 (head terms reach depth k+1). Throws when more
// than shape_cap valuations would be enumerated.
DatalogRewriting datalog_from_depth(const std::vector<Tgd>& sigma,
                                    const std::vector<Instance>& qs, size_t k,
                                    size_t shape_cap = 20000);

// Wraps a finite query rewriting: one rule R -> goal per clause.
DatalogRewriting datalog_from_queries(const std::vector<Instance>& rewriting);

// Shape-predicate encoding of a single skolem atom (see datalog_from_depth).
Atom encode_skolem_atom(const SkolemAtom& a);

// Chases the full-tgd program to its finite fixpoint, refiring only rules
// with a newly-derived body predicate, and tests the goal. Rejects inputs
// that already mention an auxiliary predicate.
bool answer_via_datalog(const Instance& d, const DatalogRewriting& rw,
                        size_t max_atoms = 200000);

struct GuardReport {
    bool guarded = false;       // some body atom contains the frontier
    bool beta_guarded = false;  // some body atom contains all body variables
    size_t gw = 0;              // smallest k admitting a decomposition; 0 if unguarded
    size_t lw = 0;              // body atom count
    // guard atom plus blocks of at most gw-1 atoms whose pairwise shared
    // variables lie in the guard
    std::optional<std::pair<Atom, std::vector<Instance>>> decomposition;
};

GuardReport guard_report(const Tgd& r);

// All minimal subsets B' of the body equal to the image of the body under
// some renaming of the body-only variables; deduplicated up to isomorphism.
std::vector<Instance> left_core_projections(const Tgd& r);

// Compositions of r1 with r2: a nonempty subset of r2's body is unified into
// r1's head (most general unifiers only), subject to the refinement
// constraints that keep r1's existentials distinct and off the remaining
// r2-body; emits body(r1) + rest(r2) -> head(r1) + head(r2), canonicalized.
std::vector<Tgd> derive_tgd(const Tgd& r1, const Tgd& r2);

struct FlattenBudget {
    size_t max_rules = 600;
    size_t max_derivations = 100000;
};

struct FlattenResult {
    std::vector<Tgd> rules;  // canonical forms, includes the input rules
    size_t k = 1;            // head-size bound actually used
    bool complete = true;    // false when a budget was exhausted
};

// Saturates the derivation closure of a guarded rule set, reducing every rule
// to (left-core body, head subset of at most k atoms) representatives, where
// k tracks the largest left-core body and query encountered.
FlattenResult flatten_k(const std::vector<Tgd>& sigma, const std::vector<Instance>& qs,
                        const FlattenBudget& b);

// Saturates d under triggers whose frontier image lies in vars(d), firing
// once per (rule, frontier image); nullopt when a budget runs out.
std::optional<Instance> flat_saturate(const Instance& d, const std::vector<Tgd>& sigma,
                                      const ChaseBudget& b);

// Query answering over flat_saturate. Complete for rule sets with the flat
// chase property (e.g. flatten_k outputs).
Certainty flat_chase(const Instance& d, const std::vector<Tgd>& sigma,
                     const std::vector<Instance>& qs, const ChaseBudget& b);

// flatten_k followed by the depth-1 shape encoding.
DatalogRewriting guarded_datalog_rewriting(const std::vector<Tgd>& sigma,
                                           const std::vector<Instance>& qs,
                                           const FlattenBudget& fb, size_t shape_cap = 200000);

std::string to_string(const SkolemTerm& t);
std::string to_string(const SkolemAtom& a);

}  // namespace er
