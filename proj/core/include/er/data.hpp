#pragma once

#include "er/model.hpp"

namespace er {

// Hard constants obey the unique-name assumption; soft constants may merge.
struct Constant {
    std::string label;
    enum class Kind { Hard, Soft } kind = Kind::Hard;

    auto operator<=>(const Constant&) const = default;
};

// A database/query term: a constant or a variable (a labelled null in data).
struct Term {
    enum class Kind { Var, Const } kind = Kind::Var;
    Variable var;
    Constant constant;

    static Term make_var(Variable v) { return Term{Kind::Var, std::move(v), {}}; }
    static Term make_const(Constant c) { return Term{Kind::Const, {}, std::move(c)}; }
    bool is_var() const { return kind == Kind::Var; }

    auto operator<=>(const Term&) const = default;
};

struct GroundAtom {
    Predicate pred;
    std::vector<Term> args;

    auto operator<=>(const GroundAtom&) const = default;
};

struct Database {
    std::vector<GroundAtom> atoms;

    auto operator<=>(const Database&) const = default;
};

struct EqualityAtom {
    Term lhs;
    Term rhs;

    auto operator<=>(const EqualityAtom&) const = default;
};

struct QueryClause {
    std::vector<GroundAtom> atoms;
    std::vector<EqualityAtom> equalities;

    auto operator<=>(const QueryClause&) const = default;
};

// (x1,...,xa) | clause OR clause OR ...
struct UCQEqQuery {
    std::string name;
    std::vector<Variable> free_vars;
    std::vector<QueryClause> clauses;

    auto operator<=>(const UCQEqQuery&) const = default;
};

std::string to_string(const Term& t);
std::string to_string(const GroundAtom& a);

}  // namespace er
