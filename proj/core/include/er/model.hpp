#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace er {

// A variable is identified by its name. Canonical forms use names v0, v1, ...
struct Variable {
    std::string name;

    auto operator<=>(const Variable&) const = default;
};

struct Predicate {
    std::string name;
    int arity = 0;

    auto operator<=>(const Predicate&) const = default;
};

struct Atom {
    Predicate pred;
    std::vector<Variable> args;

    auto operator<=>(const Atom&) const = default;
};

// Finitely-supported map Variable -> Variable, identity outside the support.
class Renaming {
public:
    Renaming() = default;
    explicit Renaming(std::map<Variable, Variable> support) : support_(std::move(support)) {}

    const Variable& operator()(const Variable& v) const {
        auto it = support_.find(v);
        return it == support_.end() ? v : it->second;
    }
    void set(const Variable& from, const Variable& to) { support_[from] = to; }
    const std::map<Variable, Variable>& support() const { return support_; }

    // (a.then(b))(v) == b(a(v))
    Renaming then(const Renaming& next) const;

    auto operator<=>(const Renaming&) const = default;

private:
    std::map<Variable, Variable> support_;
};

// A finite set of atoms over variables. Stored sorted and deduplicated.
class Instance {
public:
    Instance() = default;
    explicit Instance(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }
    size_t size() const { return atoms_.size(); }
    bool contains(const Atom& a) const;

    void insert(const Atom& a);
    void insert_all(const Instance& other);
    void erase(const Atom& a);

    std::set<Variable> vars() const;

    auto operator<=>(const Instance&) const = default;

private:
    std::vector<Atom> atoms_;
};

Atom apply_renaming(const Atom& a, const Renaming& t);
Instance apply_renaming(const Instance& i, const Renaming& t);

// Up to `limit` renamings theta with support within vars(j) and j[theta] included in i.
// Backtracking over j's atoms, most-constrained-first; output in a deterministic order.
// The node cap bounds the search; when it is hit, `hit_cap` (if given) is set and
// the result may be incomplete.
std::vector<Renaming> homomorphisms(const Instance& j, const Instance& i, size_t limit,
                                    size_t node_cap = 1000000, bool* hit_cap = nullptr);

// i entails j: some renaming embeds j into i.
bool entails(const Instance& i, const Instance& j);
// i entails some member of js.
bool entails_any(const Instance& i, const std::vector<Instance>& js);

// Canonical form: isomorphic instances yield identical results. Also returns the
// renaming from the original variables to the canonical ones.
std::pair<Instance, Renaming> canonicalize(const Instance& i);
Instance canonical(const Instance& i);

// Monotone fresh-variable supply; freshness checked against an avoid set.
class FreshSupply {
public:
    explicit FreshSupply(std::string prefix = "_f") : prefix_(std::move(prefix)) {}

    Variable fresh(const std::set<Variable>& avoid);
    Variable fresh(std::set<Variable>& avoid, bool extend_avoid);

private:
    std::string prefix_;
    uint64_t counter_ = 0;
};

std::string to_string(const Atom& a);
std::string to_string(const Instance& i);

}  // namespace er
