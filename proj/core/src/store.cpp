// SPDX-License-Identifier: Apache-2.0

#include "easytime/store.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "easytime/frontend.hpp"

namespace easytime::store {

namespace {

std::vector<std::string> split(std::string_view line, char sep, std::size_t max_fields = 0) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        if (max_fields != 0 && out.size() + 1 == max_fields) {
            out.emplace_back(line.substr(start));
            return out;
        }
        std::size_t at = line.find(sep, start);
        if (at == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, at - start));
        start = at + 1;
    }
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        out.push_back(line);
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
    return out;
}

std::int64_t to_int(const std::string& field, std::string_view what, std::size_t line_no) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw StoreError(std::string(what) + ": line " + std::to_string(line_no) + ": '" + field +
                         "' is not an integer");
    }
    return v;
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t") == std::string_view::npos; }

void check_field(const std::string& value, std::string_view what) {
    if (value.find_first_of(";\n\r") != std::string::npos) {
        throw StoreError(std::string(what) + " '" + value + "' contains a separator character");
    }
}

}  // namespace

int ResultsTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

vm::Row to_vm_row(const std::vector<std::string>& columns, const ResultsRow& row) {
    vm::Row out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out.emplace(columns[i], row.cells.at(i));
    }
    return out;
}

void from_vm_row(const std::vector<std::string>& columns, const vm::Row& data, ResultsRow& row) {
    row.cells.resize(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        auto it = data.find(columns[i]);
        if (it == data.end()) {
            throw vm::VmFault("data segment lost column " + columns[i]);
        }
        row.cells[i] = it->second;
    }
}

std::string format_runners(std::span<const RunnerRecord> runners) {
    std::string out = "id;rfid;last_name;first_name\n";
    for (const RunnerRecord& r : runners) {
        check_field(r.rfid, "rfid");
        check_field(r.last_name, "last name");
        check_field(r.first_name, "first name");
        out += std::to_string(r.id) + ';' + r.rfid + ';' + r.last_name + ';' + r.first_name + '\n';
    }
    return out;
}

std::vector<RunnerRecord> parse_runners(std::string_view text) {
    auto lines = lines_of(text);
    if (lines.empty() || split(lines[0], ';') != std::vector<std::string>{"id", "rfid", "last_name", "first_name"}) {
        throw StoreError("runners: expected header 'id;rfid;last_name;first_name'");
    }
    std::vector<RunnerRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (blank(lines[i])) {
            continue;
        }
        auto f = split(lines[i], ';');
        if (f.size() != 4) {
            throw StoreError("runners: line " + std::to_string(i + 1) + ": expected 4 fields");
        }
        out.push_back({to_int(f[0], "runners", i + 1), f[1], f[2], f[3]});
    }
    return out;
}

std::vector<RunnerRecord> read_runners(const std::filesystem::path& path) { return parse_runners(read_file(path)); }

void write_runners(const std::filesystem::path& path, std::span<const RunnerRecord> runners) {
    write_atomic(path, format_runners(runners));
}

std::string format_database(const ResultsTable& table) {
    std::string out = "id";
    for (const std::string& c : table.columns) {
        out += ';';
        out += c;
    }
    out += '\n';
    for (const ResultsRow& r : table.rows) {
        out += std::to_string(r.id);
        for (std::int64_t v : r.cells) {
            out += ';';
            out += std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

ResultsTable parse_database(std::string_view text) {
    auto lines = lines_of(text);
    if (lines.empty()) {
        throw StoreError("database: missing header");
    }
    auto header = split(lines[0], ';');
    if (header.empty() || header[0] != "id") {
        throw StoreError("database: header must start with 'id'");
    }
    ResultsTable table;
    table.columns.assign(header.begin() + 1, header.end());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (blank(lines[i])) {
            continue;
        }
        auto f = split(lines[i], ';');
        if (f.size() != header.size()) {
            throw StoreError("database: line " + std::to_string(i + 1) + ": expected " +
                             std::to_string(header.size()) + " fields");
        }
        ResultsRow row{to_int(f[0], "database", i + 1), {}};
        for (std::size_t c = 1; c < f.size(); ++c) {
            row.cells.push_back(to_int(f[c], "database", i + 1));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

ResultsTable read_database(const std::filesystem::path& path) { return parse_database(read_file(path)); }

void write_database(const std::filesystem::path& path, const ResultsTable& table) {
    write_atomic(path, format_database(table));
}

std::filesystem::path schema_path(const std::filesystem::path& pgm) {
    std::filesystem::path out = pgm;
    out += ".schema";
    return out;
}

std::string format_schema(const codegen::CompiledProgram& program) {
    std::ostringstream out;
    out << "# easytime schema v1\n";
    for (const auto& [number, info] : program.agents) {
        out << "agent;" << number << ';' << ast::to_string(info.kind) << ';' << info.source << '\n';
    }
    for (const auto& [name, value] : program.state.entries()) {
        out << "var;" << name << ';' << value << '\n';
    }
    for (const codegen::CodeBlock& b : program.blocks) {
        auto it = program.place_agents.find(b.mp);
        out << "place;" << b.mp << ';' << (it == program.place_agents.end() ? 0 : it->second) << '\n';
    }
    return out.str();
}

void write_pgm(const std::filesystem::path& path, const codegen::CompiledProgram& program) {
    write_atomic(schema_path(path), format_schema(program));
    write_atomic(path, codegen::render(program));
}

codegen::CompiledProgram read_pgm(const std::filesystem::path& path) {
    codegen::CompiledProgram cp;
    try {
        cp.blocks = vm::load(read_file(path));
    } catch (const frontend::ParseError& e) {
        throw StoreError(path.string() + ":" + e.what());
    }

    const auto sidecar = schema_path(path);
    const std::string text = read_file(sidecar);
    auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (blank(line) || line.front() == '#') {
            continue;
        }
        const std::string where = sidecar.string() + ": line " + std::to_string(i + 1);
        auto f = split(line, ';', 4);
        if (f[0] == "agent" && f.size() == 4) {
            ast::AgentKind kind;
            if (f[2] == "manual") {
                kind = ast::AgentKind::Manual;
            } else if (f[2] == "auto") {
                kind = ast::AgentKind::Auto;
            } else {
                throw StoreError(where + ": unknown agent kind '" + f[2] + "'");
            }
            if (!cp.agents.insert(to_int(f[1], "schema", i + 1), {kind, f[3]})) {
                throw StoreError(where + ": Agent " + f[1] + " is already defined");
            }
        } else if (f[0] == "var" && f.size() == 3) {
            if (!cp.state.insert(f[1], to_int(f[2], "schema", i + 1))) {
                throw StoreError(where + ": duplicate variable " + f[1]);
            }
        } else if (f[0] == "place" && f.size() == 3) {
            cp.place_agents[to_int(f[1], "schema", i + 1)] = to_int(f[2], "schema", i + 1);
        } else {
            throw StoreError(where + ": unrecognized record");
        }
    }

    std::set<std::int64_t> seen;
    for (const codegen::CodeBlock& b : cp.blocks) {
        const std::string where = path.string() + ": mp[" + std::to_string(b.mp) + "]";
        if (!seen.insert(b.mp).second) {
            throw StoreError(where + " appears twice");
        }
        auto pa = cp.place_agents.find(b.mp);
        if (pa == cp.place_agents.end()) {
            throw StoreError(where + " has no place record in the schema");
        }
        const sema::AgentInfo* info = cp.agents.find(pa->second);
        if (info == nullptr) {
            throw StoreError(where + " refers to undeclared agent " + std::to_string(pa->second));
        }
        // every FETCH of the event source must name the place's own agent
        std::vector<const codegen::Code*> pending{&b.code};
        while (!pending.empty()) {
            const codegen::Code* code = pending.back();
            pending.pop_back();
            for (const codegen::Instr& instr : *code) {
                if (const auto* fs = std::get_if<codegen::FetchSrc>(&instr.op)) {
                    if (fs->src.kind != info->kind || fs->src.source != info->source) {
                        throw StoreError(where + " fetches from a source other than its agent");
                    }
                } else if (const auto* br = std::get_if<codegen::Branch>(&instr.op)) {
                    pending.push_back(&br->then_code);
                    pending.push_back(&br->else_code);
                } else if (const auto* f = std::get_if<codegen::Fetch>(&instr.op)) {
                    if (!cp.state.contains(f->var)) {
                        throw StoreError(where + " reads undeclared variable " + f->var);
                    }
                } else if (const auto* s = std::get_if<codegen::Store>(&instr.op)) {
                    if (!cp.state.contains(s->var)) {
                        throw StoreError(where + " writes undeclared variable " + s->var);
                    }
                }
            }
        }
    }
    if (cp.place_agents.size() != cp.blocks.size()) {
        throw StoreError(sidecar.string() + ": place records do not match the code blocks");
    }
    return cp;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StoreError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StoreError("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw StoreError("short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw StoreError("cannot replace " + path.string() + ": " + ec.message());
    }
}

}  // namespace easytime::store
