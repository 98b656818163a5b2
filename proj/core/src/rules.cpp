#include "er/rules.hpp"

#include <algorithm>
#include <sstream>

namespace er {

std::set<Variable> Tgd::frontier() const {
    std::set<Variable> bv = body.vars();
    std::set<Variable> out;
    for (const auto& v : head.vars())
        if (bv.count(v)) out.insert(v);
    return out;
}

std::set<Variable> Tgd::body_only() const {
    std::set<Variable> hv = head.vars();
    std::set<Variable> out;
    for (const auto& v : body.vars())
        if (!hv.count(v)) out.insert(v);
    return out;
}

std::set<Variable> Tgd::existential() const {
    std::set<Variable> bv = body.vars();
    std::set<Variable> out;
    for (const auto& v : head.vars())
        if (!bv.count(v)) out.insert(v);
    return out;
}

std::set<Variable> Tgd::vars() const {
    std::set<Variable> out = body.vars();
    for (const auto& v : head.vars()) out.insert(v);
    return out;
}

Egd FunctionalDependency::as_egd() const {
    std::vector<Variable> u, w;
    for (int k = 1; k <= pred.arity; ++k) {
        Variable uk{"u" + std::to_string(k)};
        u.push_back(uk);
        if (std::find(key.begin(), key.end(), k) != key.end())
            w.push_back(uk);
        else
            w.push_back(Variable{"w" + std::to_string(k)});
    }
    Instance body(std::vector<Atom>{Atom{pred, u}, Atom{pred, w}});
    return Egd{std::move(body), u[target - 1], w[target - 1]};
}

std::set<Variable> DependencySet::vars() const {
    std::set<Variable> out;
    for (const auto& r : tgds)
        for (const auto& v : r.vars()) out.insert(v);
    for (const auto& r : egds)
        for (const auto& v : r.body.vars()) out.insert(v);
    return out;
}

namespace {

Renaming apart_renaming(const std::set<Variable>& rule_vars, const std::set<Variable>& avoid,
                        FreshSupply& supply) {
    std::set<Variable> taken = avoid;
    for (const auto& v : rule_vars) taken.insert(v);
    Renaming t;
    for (const auto& v : rule_vars)
        if (avoid.count(v)) t.set(v, supply.fresh(taken, true));
    return t;
}

}  // namespace

Tgd rename_apart(const Tgd& r, const std::set<Variable>& avoid, FreshSupply& supply) {
    Renaming t = apart_renaming(r.vars(), avoid, supply);
    return Tgd{apply_renaming(r.body, t), apply_renaming(r.head, t)};
}

Egd rename_apart(const Egd& r, const std::set<Variable>& avoid, FreshSupply& supply) {
    Renaming t = apart_renaming(r.body.vars(), avoid, supply);
    return Egd{apply_renaming(r.body, t), t(r.lhs), t(r.rhs)};
}

Tgd canonical_tgd(const Tgd& r) {
    // Tag body and head atoms apart, canonicalize jointly, then strip the tags.
    std::vector<Atom> tagged;
    for (const auto& a : r.body.atoms())
        tagged.push_back(Atom{Predicate{"B$" + a.pred.name, a.pred.arity}, a.args});
    for (const auto& a : r.head.atoms())
        tagged.push_back(Atom{Predicate{"H$" + a.pred.name, a.pred.arity}, a.args});
    Instance canon = canonical(Instance(std::move(tagged)));
    std::vector<Atom> body, head;
    for (const auto& a : canon.atoms()) {
        if (a.pred.name.starts_with("B$"))
            body.push_back(Atom{Predicate{a.pred.name.substr(2), a.pred.arity}, a.args});
        else
            head.push_back(Atom{Predicate{a.pred.name.substr(2), a.pred.arity}, a.args});
    }
    return Tgd{Instance(std::move(body)), Instance(std::move(head))};
}

std::string to_string(const Tgd& r) {
    std::ostringstream os;
    for (size_t k = 0; k < r.body.atoms().size(); ++k) {
        if (k) os << ", ";
        os << to_string(r.body.atoms()[k]);
    }
    os << " -> ";
    for (size_t k = 0; k < r.head.atoms().size(); ++k) {
        if (k) os << ", ";
        os << to_string(r.head.atoms()[k]);
    }
    return os.str();
}

std::string to_string(const Egd& r) {
    std::ostringstream os;
    for (size_t k = 0; k < r.body.atoms().size(); ++k) {
        if (k) os << ", ";
        os << to_string(r.body.atoms()[k]);
    }
    os << " -> " << r.lhs.name << " = " << r.rhs.name;
    return os.str();
}

}  // namespace er
