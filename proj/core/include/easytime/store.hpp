// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "easytime/codegen.hpp"
#include "easytime/vm.hpp"

// Text-table persistence for the three stores an agent works with:
//
//   RUNNERS   id;rfid;last_name;first_name
//   DATABASE  id;<var1>;<var2>;...      (declaration order)
//   PGM       rendered code blocks, plus a `<pgm>.schema` sidecar holding
//             the agent table, variable initial values and place->agent map
//
// All tables are `;`-separated, header first, LF line endings.
namespace easytime::store {

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunnerRecord {
    std::int64_t id = 0;
    std::string rfid;
    std::string last_name;
    std::string first_name;

    bool operator==(const RunnerRecord&) const = default;
};

struct ResultsRow {
    std::int64_t id = 0;
    std::vector<std::int64_t> cells;  // aligned with ResultsTable::columns

    bool operator==(const ResultsRow&) const = default;
};

struct ResultsTable {
    std::vector<std::string> columns;
    std::vector<ResultsRow> rows;

    /// Column index or -1.
    int column(std::string_view name) const;

    bool operator==(const ResultsTable&) const = default;
};

vm::Row to_vm_row(const std::vector<std::string>& columns, const ResultsRow& row);
/// Copies values back from a VM row; every column must be present.
void from_vm_row(const std::vector<std::string>& columns, const vm::Row& data, ResultsRow& row);

std::string format_runners(std::span<const RunnerRecord> runners);
std::vector<RunnerRecord> parse_runners(std::string_view text);
std::vector<RunnerRecord> read_runners(const std::filesystem::path& path);
void write_runners(const std::filesystem::path& path, std::span<const RunnerRecord> runners);

std::string format_database(const ResultsTable& table);
ResultsTable parse_database(std::string_view text);
ResultsTable read_database(const std::filesystem::path& path);
void write_database(const std::filesystem::path& path, const ResultsTable& table);

std::filesystem::path schema_path(const std::filesystem::path& pgm);
std::string format_schema(const codegen::CompiledProgram& program);

/// Writes the rendered code to `path` and the schema sidecar next to it.
void write_pgm(const std::filesystem::path& path, const codegen::CompiledProgram& program);
/// Loads code and sidecar and checks they agree with each other.
codegen::CompiledProgram read_pgm(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace easytime::store
