#include "er/io.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <json.hpp>

namespace er {

DependencySet Program::dependencies(bool fds_as_egds) const {
    DependencySet out;
    out.tgds = tgds;
    out.egds = egds;
    if (fds_as_egds)
        for (const auto& fd : fds) out.egds.push_back(fd.as_egd());
    return out;
}

namespace {

enum class Tok {
    Ident,
    HardConst,
    SoftConst,
    Int,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Arrow,
    Equals,
    Pipe,
    ColonDash,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line;
    int col;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : s_(text) {}

    Token next() {
        skip_space();
        int line = line_, col = col_;
        if (pos_ >= s_.size()) return {Tok::End, "", line, col};
        char c = s_[pos_];
        if (c == '(') return one(Tok::LParen, line, col);
        if (c == ')') return one(Tok::RParen, line, col);
        if (c == '[') return one(Tok::LBrack, line, col);
        if (c == ']') return one(Tok::RBrack, line, col);
        if (c == ',') return one(Tok::Comma, line, col);
        if (c == '.') return one(Tok::Dot, line, col);
        if (c == '=') return one(Tok::Equals, line, col);
        if (c == '|') return one(Tok::Pipe, line, col);
        if (c == '-' && peek(1) == '>') {
            advance();
            advance();
            return {Tok::Arrow, "->", line, col};
        }
        if (c == ':' && peek(1) == '-') {
            advance();
            advance();
            return {Tok::ColonDash, ":-", line, col};
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            advance();
            std::string label;
            while (pos_ < s_.size() && s_[pos_] != quote) {
                label.push_back(s_[pos_]);
                advance();
            }
            if (pos_ >= s_.size()) throw ParseError("unterminated constant", line, col);
            advance();
            return {quote == '"' ? Tok::HardConst : Tok::SoftConst, label, line, col};
        }
        if (std::isdigit((unsigned char)c)) {
            std::string t;
            while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) {
                t.push_back(s_[pos_]);
                advance();
            }
            return {Tok::Int, t, line, col};
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            std::string t;
            auto ident_char = [](char x) {
                return std::isalnum((unsigned char)x) || x == '_' || x == '$' || x == '\'';
            };
            // a quote directly after an identifier char is a prime, not a constant
            while (pos_ < s_.size() && ident_char(s_[pos_])) {
                t.push_back(s_[pos_]);
                advance();
            }
            // shape-predicate suffix: name@[...balanced...]
            if (pos_ + 1 < s_.size() && s_[pos_] == '@' && s_[pos_ + 1] == '[') {
                t.push_back('@');
                advance();
                int depth = 0;
                do {
                    char x = s_[pos_];
                    if (x == '[') ++depth;
                    if (x == ']') --depth;
                    t.push_back(x);
                    advance();
                    if (pos_ >= s_.size() && depth > 0)
                        throw ParseError("unterminated shape predicate", line, col);
                } while (depth > 0);
            }
            return {Tok::Ident, t, line, col};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }

private:
    void skip_space() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
            } else if (std::isspace((unsigned char)c)) {
                advance();
            } else {
                break;
            }
        }
    }
    char peek(size_t off) const { return pos_ + off < s_.size() ? s_[pos_ + off] : '\0'; }
    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    Token one(Tok k, int line, int col) {
        std::string t(1, s_[pos_]);
        advance();
        return {k, t, line, col};
    }

    const std::string& s_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) { shift(); }

    Program parse() {
        Program p;
        while (cur_.kind != Tok::End) statement(p);
        return p;
    }

private:
    void shift() {
        cur_ = ahead_ ? *ahead_ : lex_.next();
        ahead_.reset();
    }
    const Token& lookahead() {
        if (!ahead_) ahead_ = lex_.next();
        return *ahead_;
    }
    Token expect(Tok k, const std::string& what) {
        if (cur_.kind != k) throw ParseError("expected " + what, cur_.line, cur_.col);
        Token t = cur_;
        shift();
        return t;
    }
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, cur_.line, cur_.col); }

    int check_arity(const std::string& name, int arity, int line, int col) {
        auto [it, inserted] = arities_.emplace(name, arity);
        if (!inserted && it->second != arity)
            throw ParseError("arity mismatch for predicate " + name + ": " +
                                 std::to_string(arity) + " vs " + std::to_string(it->second),
                             line, col);
        return arity;
    }

    Term term() {
        if (cur_.kind == Tok::HardConst) {
            Term t = Term::make_const(Constant{cur_.text, Constant::Kind::Hard});
            shift();
            return t;
        }
        if (cur_.kind == Tok::SoftConst) {
            Term t = Term::make_const(Constant{cur_.text, Constant::Kind::Soft});
            shift();
            return t;
        }
        if (cur_.kind == Tok::Ident) {
            Term t = Term::make_var(Variable{cur_.text});
            shift();
            return t;
        }
        fail("expected a term");
    }

    GroundAtom ground_atom() {
        Token name = expect(Tok::Ident, "predicate name");
        expect(Tok::LParen, "'('");
        GroundAtom a;
        std::vector<Term> args;
        if (cur_.kind != Tok::RParen) {
            args.push_back(term());
            while (cur_.kind == Tok::Comma) {
                shift();
                args.push_back(term());
            }
        }
        expect(Tok::RParen, "')'");
        check_arity(name.text, (int)args.size(), name.line, name.col);
        a.pred = Predicate{name.text, (int)args.size()};
        a.args = std::move(args);
        return a;
    }

    Atom rule_atom() {
        GroundAtom g = ground_atom();
        Atom a{g.pred, {}};
        for (const auto& t : g.args) {
            if (!t.is_var()) fail("constants are not allowed in rules");
            a.args.push_back(t.var);
        }
        return a;
    }

    void statement(Program& p) {
        if (cur_.kind == Tok::Ident && cur_.text == "fd" && lookahead().kind == Tok::Ident) {
            fd_statement(p);
            return;
        }
        if (cur_.kind == Tok::Ident && cur_.text == "query" && lookahead().kind == Tok::Ident) {
            query_statement(p);
            return;
        }
        // atom list, then '.', or '->' rhs '.'
        std::vector<GroundAtom> atoms;
        atoms.push_back(ground_atom());
        while (cur_.kind == Tok::Comma) {
            shift();
            atoms.push_back(ground_atom());
        }
        if (cur_.kind == Tok::Dot) {
            shift();
            for (auto& a : atoms) p.database.atoms.push_back(std::move(a));
            return;
        }
        expect(Tok::Arrow, "'->' or '.'");
        std::vector<Atom> body;
        for (const auto& g : atoms) {
            Atom a{g.pred, {}};
            for (const auto& t : g.args) {
                if (!t.is_var()) fail("constants are not allowed in rules");
                a.args.push_back(t.var);
            }
            body.push_back(std::move(a));
        }
        if (cur_.kind == Tok::Ident && lookahead().kind == Tok::Equals) {
            Token lhs = expect(Tok::Ident, "variable");
            expect(Tok::Equals, "'='");
            Token rhs = expect(Tok::Ident, "variable");
            expect(Tok::Dot, "'.'");
            Egd e{Instance(std::move(body)), Variable{lhs.text}, Variable{rhs.text}};
            std::set<Variable> bv = e.body.vars();
            if (!bv.count(e.lhs) || !bv.count(e.rhs))
                throw ParseError("egd head variable not in body", lhs.line, lhs.col);
            p.egds.push_back(std::move(e));
            return;
        }
        std::vector<Atom> head;
        head.push_back(rule_atom());
        while (cur_.kind == Tok::Comma) {
            shift();
            head.push_back(rule_atom());
        }
        expect(Tok::Dot, "'.'");
        p.tgds.push_back(Tgd{Instance(std::move(body)), Instance(std::move(head))});
    }

    void fd_statement(Program& p) {
        shift();  // 'fd'
        Token name = expect(Tok::Ident, "predicate name");
        expect(Tok::LBrack, "'['");
        std::vector<int> key;
        key.push_back(std::stoi(expect(Tok::Int, "position").text));
        while (cur_.kind == Tok::Comma) {
            shift();
            key.push_back(std::stoi(expect(Tok::Int, "position").text));
        }
        expect(Tok::RBrack, "']'");
        expect(Tok::Arrow, "'->'");
        Token target = expect(Tok::Int, "position");
        expect(Tok::Dot, "'.'");
        std::sort(key.begin(), key.end());
        int tgt = std::stoi(target.text);
        auto it = arities_.find(name.text);
        if (it == arities_.end())
            throw ParseError("functional dependency on unknown predicate " + name.text, name.line,
                             name.col);
        int arity = it->second;
        for (int k : key)
            if (k < 1 || k > arity)
                throw ParseError("key position out of range", name.line, name.col);
        if (tgt < 1 || tgt > arity ||
            std::find(key.begin(), key.end(), tgt) != key.end())
            throw ParseError("target position invalid", name.line, name.col);
        p.fds.push_back(FunctionalDependency{Predicate{name.text, arity}, std::move(key), tgt});
    }

    void query_statement(Program& p) {
        shift();  // 'query'
        UCQEqQuery q;
        q.name = expect(Tok::Ident, "query name").text;
        expect(Tok::LParen, "'('");
        if (cur_.kind != Tok::RParen) {
            q.free_vars.push_back(Variable{expect(Tok::Ident, "variable").text});
            while (cur_.kind == Tok::Comma) {
                shift();
                q.free_vars.push_back(Variable{expect(Tok::Ident, "variable").text});
            }
        }
        expect(Tok::RParen, "')'");
        expect(Tok::ColonDash, "':-'");
        q.clauses.push_back(clause());
        while (cur_.kind == Tok::Pipe) {
            shift();
            q.clauses.push_back(clause());
        }
        expect(Tok::Dot, "'.'");
        p.queries.push_back(std::move(q));
    }

    QueryClause clause() {
        QueryClause c;
        while (true) {
            if (cur_.kind == Tok::Ident && lookahead().kind == Tok::LParen) {
                c.atoms.push_back(ground_atom());
            } else {
                Term lhs = term();
                expect(Tok::Equals, "'='");
                Term rhs = term();
                c.equalities.push_back(EqualityAtom{lhs, rhs});
            }
            if (cur_.kind != Tok::Comma) break;
            shift();
        }
        return c;
    }

    Lexer lex_;
    Token cur_{Tok::End, "", 0, 0};
    std::optional<Token> ahead_;
    std::map<std::string, int> arities_;
};

Egd canonical_egd(const Egd& e) {
    std::vector<Atom> tagged;
    for (const auto& a : e.body.atoms())
        tagged.push_back(Atom{Predicate{"B$" + a.pred.name, a.pred.arity}, a.args});
    tagged.push_back(Atom{Predicate{"E$", 2}, {e.lhs, e.rhs}});
    Instance canon = canonical(Instance(std::move(tagged)));
    std::vector<Atom> body;
    Variable lhs, rhs;
    for (const auto& a : canon.atoms()) {
        if (a.pred.name == "E$") {
            lhs = a.args[0];
            rhs = a.args[1];
        } else {
            body.push_back(Atom{Predicate{a.pred.name.substr(2), a.pred.arity}, a.args});
        }
    }
    return Egd{Instance(std::move(body)), lhs, rhs};
}

}  // namespace

Program parse_program(const std::string& text) {
    return Parser(text).parse();
}

std::string serialize_tgd(const Tgd& r) {
    return to_string(r) + ".";
}

std::string serialize_egd(const Egd& r) {
    return to_string(r) + ".";
}

std::string serialize_fd(const FunctionalDependency& fd) {
    std::ostringstream os;
    os << "fd " << fd.pred.name << "[";
    for (size_t k = 0; k < fd.key.size(); ++k) {
        if (k) os << ",";
        os << fd.key[k];
    }
    os << "] -> " << fd.target << ".";
    return os.str();
}

std::string to_string(const Term& t) {
    if (t.is_var()) return t.var.name;
    if (t.constant.kind == Constant::Kind::Hard) return "\"" + t.constant.label + "\"";
    return "'" + t.constant.label + "'";
}

std::string to_string(const GroundAtom& a) {
    std::ostringstream os;
    os << a.pred.name << "(";
    for (size_t k = 0; k < a.args.size(); ++k) {
        if (k) os << ",";
        os << to_string(a.args[k]);
    }
    os << ")";
    return os.str();
}

std::string serialize_fact(const GroundAtom& a) {
    return to_string(a) + ".";
}

std::string serialize_query(const UCQEqQuery& q) {
    std::ostringstream os;
    os << "query " << q.name << "(";
    for (size_t k = 0; k < q.free_vars.size(); ++k) {
        if (k) os << ",";
        os << q.free_vars[k].name;
    }
    os << ") :- ";
    for (size_t c = 0; c < q.clauses.size(); ++c) {
        if (c) os << " | ";
        const auto& cl = q.clauses[c];
        bool first = true;
        for (const auto& a : cl.atoms) {
            if (!first) os << ", ";
            os << to_string(a);
            first = false;
        }
        for (const auto& e : cl.equalities) {
            if (!first) os << ", ";
            os << to_string(e.lhs) << " = " << to_string(e.rhs);
            first = false;
        }
    }
    os << ".";
    return os.str();
}

std::string serialize_program(const Program& p) {
    std::ostringstream os;
    std::vector<std::string> lines;
    for (const auto& r : p.tgds) lines.push_back(serialize_tgd(canonical_tgd(r)));
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) os << l << "\n";
    lines.clear();
    for (const auto& r : p.egds) lines.push_back(serialize_egd(canonical_egd(r)));
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) os << l << "\n";
    lines.clear();
    for (const auto& fd : p.fds) lines.push_back(serialize_fd(fd));
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    for (const auto& l : lines) os << l << "\n";

    // database: sort atoms, then renumber nulls by first occurrence
    std::vector<GroundAtom> atoms = p.database.atoms;
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    std::map<Variable, Variable> nulls;
    for (auto& a : atoms)
        for (auto& t : a.args)
            if (t.is_var()) {
                auto it = nulls.find(t.var);
                if (it == nulls.end())
                    it = nulls.emplace(t.var, Variable{"_n" + std::to_string(nulls.size())})
                             .first;
                t.var = it->second;
            }
    std::sort(atoms.begin(), atoms.end());
    for (const auto& a : atoms) os << serialize_fact(a) << "\n";
    for (const auto& q : p.queries) os << serialize_query(q) << "\n";
    return os.str();
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json atom_json(const Atom& a) {
    ordered_json arr = ordered_json::array();
    arr.push_back(a.pred.name);
    for (const auto& v : a.args) arr.push_back(v.name);
    return arr;
}

ordered_json inst_json(const Instance& i) {
    ordered_json arr = ordered_json::array();
    for (const auto& a : i.atoms()) arr.push_back(atom_json(a));
    return arr;
}

ordered_json ground_atom_json(const GroundAtom& a) {
    ordered_json arr = ordered_json::array();
    arr.push_back(a.pred.name);
    for (const auto& t : a.args) arr.push_back(to_string(t));
    return arr;
}

}  // namespace

std::string instance_json(const Instance& i) {
    return inst_json(i).dump();
}

std::string instances_json(const std::vector<Instance>& is) {
    ordered_json arr = ordered_json::array();
    for (const auto& i : is) arr.push_back(inst_json(i));
    return arr.dump();
}

std::string program_json(const Program& p) {
    ordered_json j;
    j["tgds"] = ordered_json::array();
    for (const auto& r : p.tgds)
        j["tgds"].push_back({{"body", inst_json(r.body)}, {"head", inst_json(r.head)}});
    j["egds"] = ordered_json::array();
    for (const auto& r : p.egds)
        j["egds"].push_back(
            {{"body", inst_json(r.body)}, {"lhs", r.lhs.name}, {"rhs", r.rhs.name}});
    j["fds"] = ordered_json::array();
    for (const auto& fd : p.fds)
        j["fds"].push_back({{"pred", fd.pred.name}, {"key", fd.key}, {"target", fd.target}});
    j["database"] = ordered_json::array();
    for (const auto& a : p.database.atoms) j["database"].push_back(ground_atom_json(a));
    j["queries"] = ordered_json::array();
    for (const auto& q : p.queries) {
        ordered_json qj;
        qj["name"] = q.name;
        qj["free"] = ordered_json::array();
        for (const auto& v : q.free_vars) qj["free"].push_back(v.name);
        qj["clauses"] = ordered_json::array();
        for (const auto& c : q.clauses) {
            ordered_json cj;
            cj["atoms"] = ordered_json::array();
            for (const auto& a : c.atoms) cj["atoms"].push_back(ground_atom_json(a));
            cj["equalities"] = ordered_json::array();
            for (const auto& e : c.equalities)
                cj["equalities"].push_back({to_string(e.lhs), to_string(e.rhs)});
            qj["clauses"].push_back(cj);
        }
        j["queries"].push_back(qj);
    }
    return j.dump(2);
}

}  // namespace er
