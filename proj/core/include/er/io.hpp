#pragma once

#include <stdexcept>
#include <string>

#include "er/data.hpp"
#include "er/rules.hpp"

namespace er {

struct Program {
    std::vector<Tgd> tgds;
    std::vector<Egd> egds;
    std::vector<FunctionalDependency> fds;
    Database database;
    std::vector<UCQEqQuery> queries;

    DependencySet dependencies(bool fds_as_egds = true) const;

    auto operator<=>(const Program&) const = default;
};

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line(line),
          column(column) {}
};

// .dlg text. `#` starts a line comment; statements end with `.`:
//   facts       A("c", 'soft', x).
//   tgd         A(x,y) -> B(x,z), C(z,y).
//   egd         A(x,y), A(x,y2) -> y = y2.
//   fd          fd B[1,2] -> 3.
//   query       query q(x1,x2) :- B(x1,x2) | A(u,v), x1 = u, x2 = u.
Program parse_program(const std::string& text);

// Deterministic: rules canonicalized and sorted, database nulls renumbered.
// parse(serialize(p)) == serialize-normal-form of p.
std::string serialize_program(const Program& p);

std::string serialize_tgd(const Tgd& r);
std::string serialize_egd(const Egd& r);
std::string serialize_fd(const FunctionalDependency& fd);
std::string serialize_query(const UCQEqQuery& q);
std::string serialize_fact(const GroundAtom& a);

// JSON forms; field order fixed (instances as arrays of [pred, args...],
// rules as {body, head}).
std::string program_json(const Program& p);
std::string instance_json(const Instance& i);
std::string instances_json(const std::vector<Instance>& is);

}  // namespace er
