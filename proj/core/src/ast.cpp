// SPDX-License-Identifier: Apache-2.0

#include "easytime/ast.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace easytime::ast {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::array<std::string_view, 9> kKeywords = {
    "manual", "auto", "var", "mp", "agnt", "dec", "upd", "true", "false"};

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Printer {
public:
    void line(int depth, const std::string& text) {
        for (int i = 0; i < depth; ++i) {
            out_ << "  ";
        }
        out_ << text << '\n';
    }

    void stmt(int depth, const Stmt& s) {
        std::visit(Overloaded{
                       [&](const Dec& d) { line(depth, "dec " + d.var + ";"); },
                       [&](const Upd& u) { line(depth, "upd " + u.var + ";"); },
                       [&](const Assign& a) {
                           line(depth, a.var + " := " + pretty_print(a.value) + ";");
                       },
                       [&](const Cond& c) { cond(depth, "", c); },
                   },
                   s.node);
    }

    std::string str() const { return out_.str(); }

private:
    // Chains of single-statement conditionals stay on one line:
    // (a == 1) -> (b == 2) -> upd X;
    void cond(int depth, const std::string& prefix, const Cond& c) {
        std::string head = prefix + "(" + pretty_print(c.test) + ") -> ";
        if (c.body.size() == 1) {
            const Stmt& only = c.body.front();
            if (const auto* inner = std::get_if<Cond>(&only.node)) {
                cond(depth, head, *inner);
                return;
            }
            std::string single = pretty_print(only);
            single.pop_back();  // trailing newline
            line(depth, head + single);
            return;
        }
        line(depth, head + "{");
        for (const Stmt& s : c.body) {
            stmt(depth + 1, s);
        }
        line(depth, "}");
    }

    std::ostringstream out_;
};

void check_body(const std::vector<Stmt>& body, const std::string& where,
                std::vector<std::string>& problems);

void check_aexp(const Aexp& a, const std::string& where, std::vector<std::string>& problems) {
    std::visit(Overloaded{
                   [&](const Num& n) {
                       if (n.value < 0) {
                           problems.push_back(where + ": negative literal " +
                                              std::to_string(n.value));
                       }
                   },
                   [&](const Var& v) {
                       if (!is_identifier(v.name)) {
                           problems.push_back(where + ": bad identifier '" + v.name + "'");
                       }
                   },
               },
               a.node);
}

void check_ident(const std::string& name, const std::string& where,
                 std::vector<std::string>& problems) {
    if (!is_identifier(name)) {
        problems.push_back(where + ": bad identifier '" + name + "'");
    }
}

void check_stmt(const Stmt& s, const std::string& where, std::vector<std::string>& problems) {
    std::visit(Overloaded{
                   [&](const Dec& d) { check_ident(d.var, where, problems); },
                   [&](const Upd& u) { check_ident(u.var, where, problems); },
                   [&](const Assign& a) {
                       check_ident(a.var, where, problems);
                       check_aexp(a.value, where, problems);
                   },
                   [&](const Cond& c) {
                       std::visit(Overloaded{
                                      [](const True&) {},
                                      [](const False&) {},
                                      [&](const Eq& e) {
                                          check_aexp(e.lhs, where, problems);
                                          check_aexp(e.rhs, where, problems);
                                      },
                                      [&](const Neq& e) {
                                          check_aexp(e.lhs, where, problems);
                                          check_aexp(e.rhs, where, problems);
                                      },
                                  },
                                  c.test.node);
                       check_body(c.body, where, problems);
                   },
               },
               s.node);
}

void check_body(const std::vector<Stmt>& body, const std::string& where,
                std::vector<std::string>& problems) {
    if (body.empty()) {
        problems.push_back(where + ": empty statement list");
    }
    for (const Stmt& s : body) {
        check_stmt(s, where, problems);
    }
}

}  // namespace

std::string_view to_string(AgentKind kind) {
    return kind == AgentKind::Manual ? "manual" : "auto";
}

Aexp num(std::int64_t value) { return Aexp{Num{value}, {}}; }
Aexp var(std::string name) { return Aexp{Var{std::move(name)}, {}}; }
Stmt dec(std::string name) { return Stmt{Dec{std::move(name)}, {}}; }
Stmt upd(std::string name) { return Stmt{Upd{std::move(name)}, {}}; }
Stmt assign(std::string name, Aexp value) {
    return Stmt{Assign{std::move(name), std::move(value)}, {}};
}
Stmt cond(Bexp test, std::vector<Stmt> body) {
    return Stmt{Cond{std::move(test), std::move(body)}, {}};
}
Bexp always() { return Bexp{True{}, {}}; }
Bexp never() { return Bexp{False{}, {}}; }
Bexp eq(Aexp lhs, Aexp rhs) { return Bexp{Eq{std::move(lhs), std::move(rhs)}, {}}; }
Bexp neq(Aexp lhs, Aexp rhs) { return Bexp{Neq{std::move(lhs), std::move(rhs)}, {}}; }

bool is_keyword(std::string_view text) {
    for (std::string_view kw : kKeywords) {
        if (kw == text) {
            return true;
        }
    }
    return false;
}

bool is_identifier(std::string_view text) {
    if (text.empty() || !is_alpha(text.front())) {
        return false;
    }
    for (char c : text) {
        if (!is_alpha(c) && !is_digit(c) && c != '_') {
            return false;
        }
    }
    return !is_keyword(text);
}

bool is_ipv4(std::string_view text) {
    int parts = 0;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = text.find('.', start);
        std::string_view octet =
            text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (octet.empty() || octet.size() > 3) {
            return false;
        }
        for (char c : octet) {
            if (!is_digit(c)) {
                return false;
            }
        }
        int value = 0;
        std::from_chars(octet.data(), octet.data() + octet.size(), value);
        if (value > 255) {
            return false;
        }
        ++parts;
        if (dot == std::string_view::npos) {
            break;
        }
        start = dot + 1;
    }
    return parts == 4;
}

std::vector<std::string> validate(const Program& program) {
    std::vector<std::string> problems;
    if (program.agents.empty()) {
        problems.emplace_back("program has no agent declarations");
    }
    if (program.decls.empty()) {
        problems.emplace_back("program has no variable declarations");
    }
    if (program.places.empty()) {
        problems.emplace_back("program has no measuring places");
    }
    for (const AgentDecl& a : program.agents) {
        const std::string where = "agent " + std::to_string(a.number);
        if (a.number <= 0) {
            problems.push_back(where + ": number must be positive");
        }
        if (a.kind == AgentKind::Manual &&
            (a.source.find('"') != std::string::npos || a.source.find('\n') != std::string::npos)) {
            problems.push_back(where + ": file spec may not contain quotes or newlines");
        }
        if (a.kind == AgentKind::Auto && !is_ipv4(a.source)) {
            problems.push_back(where + ": '" + a.source + "' is not a dotted-quad address");
        }
    }
    for (const VarDecl& d : program.decls) {
        check_ident(d.name, "var " + d.name, problems);
        check_aexp(d.init, "var " + d.name, problems);
    }
    for (const MeasPlace& m : program.places) {
        const std::string where = "mp[" + std::to_string(m.mp) + "]";
        if (m.mp <= 0 || m.agent <= 0) {
            problems.push_back(where + ": place and agent numbers must be positive");
        }
        check_body(m.body, where, problems);
    }
    return problems;
}

std::string pretty_print(const Aexp& value) {
    return std::visit(Overloaded{
                          [](const Num& n) { return std::to_string(n.value); },
                          [](const Var& v) { return v.name; },
                      },
                      value.node);
}

std::string pretty_print(const Bexp& test) {
    return std::visit(Overloaded{
                          [](const True&) { return std::string("true"); },
                          [](const False&) { return std::string("false"); },
                          [](const Eq& e) { return pretty_print(e.lhs) + " == " + pretty_print(e.rhs); },
                          [](const Neq& e) {
                              return pretty_print(e.lhs) + " != " + pretty_print(e.rhs);
                          },
                      },
                      test.node);
}

std::string pretty_print(const Stmt& stmt) {
    Printer p;
    p.stmt(0, stmt);
    return p.str();
}

std::string pretty_print(const Program& program) {
    Printer p;
    for (const AgentDecl& a : program.agents) {
        if (a.kind == AgentKind::Manual) {
            p.line(0, std::to_string(a.number) + " manual \"" + a.source + "\";");
        } else {
            p.line(0, std::to_string(a.number) + " auto " + a.source + ";");
        }
    }
    p.line(0, "");
    for (const VarDecl& d : program.decls) {
        p.line(0, "var " + d.name + " := " + pretty_print(d.init) + ";");
    }
    p.line(0, "");
    for (const MeasPlace& m : program.places) {
        p.line(0, "mp[" + std::to_string(m.mp) + "] -> agnt[" + std::to_string(m.agent) + "] {");
        for (const Stmt& s : m.body) {
            p.stmt(1, s);
        }
        p.line(0, "}");
    }
    return p.str();
}

}  // namespace easytime::ast
