// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "easytime/ast.hpp"
#include "easytime/sema.hpp"

namespace easytime::codegen {

/// Where a FETCH of the event time comes from. Rendered as
/// `accessfile("abc.res")` for manual agents and `connect(1.2.3.4)` for
/// automatic ones.
struct SourceRef {
    ast::AgentKind kind = ast::AgentKind::Manual;
    std::string source;

    bool operator==(const SourceRef&) const = default;
};

struct Instr;
using Code = std::vector<Instr>;

struct Fetch {
    std::string var;
    bool operator==(const Fetch&) const = default;
};
struct FetchSrc {
    SourceRef src;
    bool operator==(const FetchSrc&) const = default;
};
struct Store {
    std::string var;
    bool operator==(const Store&) const = default;
};
struct Push {
    std::int64_t value = 0;
    bool operator==(const Push&) const = default;
};
struct Dec {
    bool operator==(const Dec&) const = default;
};
struct Eq {
    bool operator==(const Eq&) const = default;
};
struct Neq {
    bool operator==(const Neq&) const = default;
};
struct Noop {
    bool operator==(const Noop&) const = default;
};
struct Branch {
    Code then_code;
    Code else_code;
    bool operator==(const Branch&) const = default;
};

struct Instr {
    std::variant<Fetch, FetchSrc, Store, Push, Dec, Eq, Neq, Branch, Noop> op;

    bool operator==(const Instr&) const = default;
};

/// Compiled code of one measuring place: `(WAIT i <code>, <mp>)`.
struct CodeBlock {
    std::int64_t mp = 0;
    Code code;

    bool operator==(const CodeBlock&) const = default;
};

struct CompiledProgram {
    std::vector<CodeBlock> blocks;               // source order, unique mp
    sema::AgentTable agents;
    sema::VarState state;                        // results-table schema and initial values
    std::map<std::int64_t, std::int64_t> place_agents;  // mp -> controlling agent

    const CodeBlock* find_block(std::int64_t mp) const;
    std::vector<std::string> columns() const { return state.names(); }

    bool operator==(const CompiledProgram&) const = default;
};

struct CompileResult {
    std::optional<CompiledProgram> program;  // absent whenever errors is nonempty
    std::vector<sema::SemaError> errors;
};

Code compile_stmt(const ast::Stmt& stmt, const SourceRef& src);
Code compile_body(const std::vector<ast::Stmt>& body, const SourceRef& src);

/// Precondition: the place's agent is in `agents` (checked by sema).
CodeBlock compile_place(const ast::MeasPlace& place, const sema::AgentTable& agents);

/// Runs the semantic checks, then generates one block per measuring place.
/// No code is produced when any check fails.
CompileResult compile_program(const ast::Program& program);

std::string render(const Instr& instr);
std::string render(const Code& code);
std::string render(const CodeBlock& block);
/// Blocks on one line each, separated by a blank line, newline-terminated.
std::string render(const CompiledProgram& program);

/// Collapses every run of whitespace to a single space and trims both ends.
std::string normalize_whitespace(const std::string& text);

/// Total instruction count, counting both arms of every branch.
std::size_t instruction_count(const Code& code);

}  // namespace easytime::codegen
