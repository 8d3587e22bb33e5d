// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace easytime::ast {

/// Source position attached to nodes for diagnostics. Positions never take
/// part in structural equality, so two trees that differ only in layout
/// compare equal.
struct SourcePos {
    int line = 0;
    int col = 0;

    friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

enum class AgentKind { Manual, Auto };

std::string_view to_string(AgentKind kind);

struct AgentDecl {
    std::int64_t number = 0;
    AgentKind kind = AgentKind::Manual;
    std::string source;  // file path (Manual) or dotted-quad address (Auto)
    SourcePos pos;

    bool operator==(const AgentDecl&) const = default;
};

struct Num {
    std::int64_t value = 0;
    bool operator==(const Num&) const = default;
};

struct Var {
    std::string name;
    bool operator==(const Var&) const = default;
};

struct Aexp {
    std::variant<Num, Var> node;
    SourcePos pos;

    bool operator==(const Aexp&) const = default;
};

struct True {
    bool operator==(const True&) const = default;
};
struct False {
    bool operator==(const False&) const = default;
};
struct Eq {
    Aexp lhs;
    Aexp rhs;
    bool operator==(const Eq&) const = default;
};
struct Neq {
    Aexp lhs;
    Aexp rhs;
    bool operator==(const Neq&) const = default;
};

struct Bexp {
    std::variant<True, False, Eq, Neq> node;
    SourcePos pos;

    bool operator==(const Bexp&) const = default;
};

struct VarDecl {
    std::string name;
    Aexp init;
    SourcePos pos;

    bool operator==(const VarDecl&) const = default;
};

struct Stmt;

struct Dec {
    std::string var;
    bool operator==(const Dec&) const = default;
};
struct Upd {
    std::string var;
    bool operator==(const Upd&) const = default;
};
struct Assign {
    std::string var;
    Aexp value;
    bool operator==(const Assign&) const = default;
};
struct Cond {
    Bexp test;
    std::vector<Stmt> body;  // nonempty
    bool operator==(const Cond&) const = default;
};

struct Stmt {
    std::variant<Dec, Upd, Assign, Cond> node;
    SourcePos pos;

    bool operator==(const Stmt&) const = default;
};

struct MeasPlace {
    std::int64_t mp = 0;
    std::int64_t agent = 0;
    std::vector<Stmt> body;  // nonempty
    SourcePos pos;

    bool operator==(const MeasPlace&) const = default;
};

struct Program {
    std::vector<AgentDecl> agents;
    std::vector<VarDecl> decls;
    std::vector<MeasPlace> places;

    bool operator==(const Program&) const = default;
};

// Convenience constructors, mostly for tests and generators.
Aexp num(std::int64_t value);
Aexp var(std::string name);
Stmt dec(std::string name);
Stmt upd(std::string name);
Stmt assign(std::string name, Aexp value);
Stmt cond(Bexp test, std::vector<Stmt> body);
Bexp always();
Bexp never();
Bexp eq(Aexp lhs, Aexp rhs);
Bexp neq(Aexp lhs, Aexp rhs);

bool is_identifier(std::string_view text);
bool is_keyword(std::string_view text);
bool is_ipv4(std::string_view text);

/// Structural well-formedness: nonempty sections, legal identifiers,
/// positive agent/place numbers, non-negative literals, sources that match
/// their agent kind. Returns one message per violation; empty means valid.
std::vector<std::string> validate(const Program& program);

/// Emits canonical concrete syntax; parse(pretty_print(p)) == p for every
/// valid program.
std::string pretty_print(const Program& program);
std::string pretty_print(const Stmt& stmt);
std::string pretty_print(const Bexp& test);
std::string pretty_print(const Aexp& value);

}  // namespace easytime::ast
