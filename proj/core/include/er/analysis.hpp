#pragma once

#include <optional>

#include "er/rules.hpp"

namespace er {

// Argument position of a predicate, 1-based.
struct Position {
    Predicate pred;
    int index = 1;

    auto operator<=>(const Position&) const = default;
};

struct ClassFlags {
    bool lav = false;       // every body has at most one atom
    bool lossless = false;  // every head atom contains all body variables
    bool acyclic = false;   // head predicates can be ordered strictly below body predicates
    bool datalog = false;   // no existential variables
};

ClassFlags classify(const std::vector<Tgd>& sigma);

// One single-atom-head rule per head atom of each tgd (body unchanged).
std::vector<Tgd> gav_projections(const std::vector<Tgd>& sigma);

// Least set closed under, for every projection B -> A:
//  (i)  body positions of variables absent from A are affected;
//  (ii) if all head positions of a shared variable are affected, so are its
//       body positions.
std::set<Position> affected_positions(const std::vector<Tgd>& sigma);

struct StickinessWitness {
    Tgd projection;
    Variable var;
};

struct StickinessReport {
    bool sticky = true;
    std::optional<StickinessWitness> violation;
};

// Sticky: in every projection, a body variable whose body positions are all
// affected occurs in a single body atom (possibly several times within it).
StickinessReport is_sticky(const std::vector<Tgd>& sigma);

// Body atoms whose head-absent variables are non-empty and occur in no other
// body atom.
std::vector<Atom> simplifiable_atoms(const Tgd& r);

// Replaces `a` in `r` by a fresh projection atom over the head-shared
// variables of `a` (first-occurrence order) and, for every most-general match
// of `a` against a head atom of the resulting set, adds a rule deriving the
// projection atom from that rule's body. Throws std::invalid_argument unless
// r is in sigma and a is simplifiable in r.
std::vector<Tgd> simplify_step(const std::vector<Tgd>& sigma, const Tgd& r, const Atom& a);

struct SimplificationStep {
    Tgd rule;         // the rule before this step
    Atom atom;        // the body atom replaced
    Predicate fresh;  // the projection predicate introduced
    size_t vars_before = 0;
    size_t vars_after = 0;  // strictly smaller than vars_before
};

struct SimplificationResult {
    std::vector<Tgd> simplified;          // fixpoint with no simplifiable atom
    std::vector<Tgd> transfer;            // datalog rules a -> fresh(x) per step
    std::vector<Tgd> inverse;             // fresh(x) -> exists y. a, acyclic
    std::vector<SimplificationStep> trace;
};

SimplificationResult simplify_fixpoint(const std::vector<Tgd>& sigma);

}  // namespace er
