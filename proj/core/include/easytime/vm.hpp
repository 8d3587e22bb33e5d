// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "easytime/ast.hpp"
#include "easytime/codegen.hpp"
#include "easytime/sema.hpp"

namespace easytime::vm {

/// One competitor's variables as seen by a running block.
using Row = std::map<std::string, std::int64_t, std::less<>>;

/// Stack underflow, leftover stack or an unknown identifier. Always a
/// compiler or loader bug, never bad user input.
class VmFault : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct ExecResult {
    Row data_after;
    std::size_t steps = 0;

    bool operator==(const ExecResult&) const = default;
};

/// Code of one measuring place paired with its mp number. Holds no state
/// between events: the data segment and time register are loaded per run.
class VmInstance {
public:
    explicit VmInstance(codegen::CodeBlock block) : block_(std::move(block)) {}

    std::int64_t mp() const { return block_.mp; }
    const codegen::Code& code() const { return block_.code; }

    ExecResult run(Row data, std::int64_t event_time) const;

private:
    codegen::CodeBlock block_;
};

ExecResult execute(const codegen::CodeBlock& block, Row row, std::int64_t event_time);

/// Parses rendered code text back into blocks; inverse of codegen::render.
/// Whitespace between tokens is free, so the wrapped layout of a printed
/// listing loads as well. Throws frontend::ParseError.
std::vector<codegen::CodeBlock> load(std::string_view code_text);

/// Walks the statements directly without compiling them. Used as the
/// oracle for the compiled path.
Row reference_execute(const ast::MeasPlace& place, const sema::AgentTable& agents, Row row,
                      std::int64_t event_time);

}  // namespace easytime::vm
