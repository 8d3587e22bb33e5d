// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "easytime/ast.hpp"

namespace easytime::sema {

struct AgentInfo {
    ast::AgentKind kind = ast::AgentKind::Manual;
    std::string source;

    bool operator==(const AgentInfo&) const = default;
};

/// Agent number -> (kind, source). Insert-only.
class AgentTable {
public:
    /// Returns false and leaves the table untouched when the number is
    /// already bound; the first binding always wins.
    bool insert(std::int64_t number, AgentInfo info);

    const AgentInfo* find(std::int64_t number) const;
    bool contains(std::int64_t number) const { return find(number) != nullptr; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    bool operator==(const AgentTable&) const = default;

private:
    std::map<std::int64_t, AgentInfo> entries_;
};

/// Variable -> initial value, in declaration order. The order is the column
/// order of the results table.
class VarState {
public:
    bool insert(std::string name, std::int64_t value);

    std::optional<std::int64_t> find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name).has_value(); }
    std::size_t size() const { return entries_.size(); }

    const std::vector<std::pair<std::string, std::int64_t>>& entries() const { return entries_; }
    std::vector<std::string> names() const;

    bool operator==(const VarState& other) const { return entries_ == other.entries_; }

private:
    std::vector<std::pair<std::string, std::int64_t>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class ErrorKind { DuplicateAgent, DuplicateVar, UndefinedVar, UndefinedAgent };

std::string_view to_string(ErrorKind kind);

struct SemaError {
    ErrorKind kind;
    std::string subject;
    int line = 0;
    int col = 0;
    std::string message;

    bool operator==(const SemaError&) const = default;
};

/// `line:col: kind: subject: message`
std::string format_diagnostic(const SemaError& error);

/// A best-effort value plus every error met while building it.
template <typename T>
struct Checked {
    T value;
    std::vector<SemaError> errors;

    bool ok() const { return errors.empty(); }
};

/// Left fold of the agent declarations into a table. A repeated number is
/// reported and the later declaration dropped.
Checked<AgentTable> build_agents(std::span<const ast::AgentDecl> decls);

/// Evaluates initializers left to right; a variable initializer reads the
/// value already bound. Forward references are rejected.
Checked<VarState> build_state(std::span<const ast::VarDecl> decls);

/// Checks agent references, variable uses and measuring-place uniqueness.
/// Collects every error rather than stopping at the first.
std::vector<SemaError> check_program(const ast::Program& program, const AgentTable& agents,
                                     const VarState& state);

}  // namespace easytime::sema
