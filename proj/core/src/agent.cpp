// SPDX-License-Identifier: Apache-2.0

#include "easytime/agent.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <ctime>
#include <iostream>
#include <set>

namespace easytime::agent {

namespace {

std::atomic<bool> g_verbose{true};

std::optional<std::int64_t> parse_int(std::string_view field) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        return std::nullopt;
    }
    return v;
}

std::string_view trim_eol(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
        line.remove_suffix(1);
    }
    return line;
}

// Exactly three `;`-separated fields.
std::optional<std::array<std::string_view, 3>> three_fields(std::string_view line) {
    std::size_t a = line.find(';');
    if (a == std::string_view::npos) {
        return std::nullopt;
    }
    std::size_t b = line.find(';', a + 1);
    if (b == std::string_view::npos || line.find(';', b + 1) != std::string_view::npos) {
        return std::nullopt;
    }
    return std::array<std::string_view, 3>{line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)};
}

std::optional<Event> finish(CompetitorKey key, std::string_view mp_field, std::string_view time_field) {
    auto mp = parse_int(mp_field);
    auto time = parse_int(time_field);
    if (!mp || !time || *time < 0) {
        return std::nullopt;
    }
    return Event{std::move(key), *mp, *time};
}

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::ofstream open_log(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw StartupError("cannot open log " + path.string());
    }
    return out;
}

}  // namespace

void log_line(std::string_view level, std::string_view message) {
    if (g_verbose.load(std::memory_order_relaxed)) {
        std::clog << "easytime [" << level << "] " << message << '\n';
    }
}

void set_verbose(bool on) { g_verbose.store(on, std::memory_order_relaxed); }

std::optional<Event> parse_manual_line(std::string_view line) {
    auto f = three_fields(trim_eol(line));
    if (!f) {
        return std::nullopt;
    }
    auto number = parse_int((*f)[0]);
    if (!number) {
        return std::nullopt;
    }
    return finish(StartNumber{*number}, (*f)[1], (*f)[2]);
}

std::optional<Event> parse_online_line(std::string_view line) {
    auto f = three_fields(trim_eol(line));
    if (!f || (*f)[0].empty()) {
        return std::nullopt;
    }
    return finish(RfidTag{std::string((*f)[0])}, (*f)[1], (*f)[2]);
}

std::string format_event_line(const Event& event) {
    std::string key = std::holds_alternative<StartNumber>(event.competitor)
                          ? std::to_string(std::get<StartNumber>(event.competitor).value)
                          : std::get<RfidTag>(event.competitor).value;
    return key + ';' + std::to_string(event.mp) + ';' + std::to_string(event.time);
}

Agent::Agent(AgentConfig config, std::vector<RunnerRecord> runners)
    : config_(std::move(config)), runners_(std::move(runners)) {
    if (config_.poll_interval <= std::chrono::milliseconds::zero()) {
        throw StartupError("poll interval must be positive");
    }
    if (runners_.empty()) {
        throw StartupError("runner table is empty");
    }
    if (config_.pgm.blocks.empty()) {
        throw StartupError("program has no code blocks");
    }
    if (config_.archive_dir.empty()) {
        config_.archive_dir = config_.data_dir / "archive";
    }
    for (std::size_t i = 0; i < runners_.size(); ++i) {
        const RunnerRecord& r = runners_[i];
        if (r.rfid.empty()) {
            throw StartupError("runner " + std::to_string(r.id) + " has no rfid");
        }
        if (!by_id_.emplace(r.id, i).second) {
            throw StartupError("duplicate runner id " + std::to_string(r.id));
        }
        if (!by_rfid_.emplace(r.rfid, i).second) {
            throw StartupError("duplicate rfid " + r.rfid);
        }
    }
    for (const codegen::CodeBlock& b : config_.pgm.blocks) {
        if (!machines_.emplace(b.mp, vm::VmInstance(b)).second) {
            throw StartupError("duplicate code block for mp " + std::to_string(b.mp));
        }
    }
    columns_ = config_.pgm.columns();

    std::error_code ec;
    std::filesystem::create_directories(config_.data_dir, ec);
    std::filesystem::create_directories(config_.archive_dir, ec);
    if (!std::filesystem::is_directory(config_.data_dir)) {
        throw StartupError("cannot create data directory " + config_.data_dir.string());
    }

    table_.columns = columns_;
    resumed_ = config_.resume && resume_from_store();
    if (!resumed_) {
        std::vector<std::int64_t> initial;
        for (const auto& [name, value] : config_.pgm.state.entries()) {
            initial.push_back(value);
        }
        for (const RunnerRecord& r : runners_) {
            table_.rows.push_back(ResultsRow{r.id, initial});
        }
    }

    try {
        store::write_pgm(config_.data_dir / "pgm.txt", config_.pgm);
        store::write_runners(config_.data_dir / "runners.txt", runners_);
        store::write_database(database_path(), table_);
    } catch (const store::StoreError& e) {
        throw StartupError(e.what());
    }
    events_log_ = open_log(events_log_path());
    rejects_log_ = open_log(rejects_log_path());
    warnings_log_ = open_log(warnings_log_path());
}

bool Agent::resume_from_store() {
    if (!std::filesystem::exists(database_path())) {
        return false;
    }
    store::ResultsTable persisted;
    try {
        persisted = store::read_database(database_path());
        const auto runners_file = config_.data_dir / "runners.txt";
        if (std::filesystem::exists(runners_file) && store::read_runners(runners_file) != runners_) {
            throw StartupError("persisted runners differ from the supplied runner table");
        }
    } catch (const store::StoreError& e) {
        throw StartupError(std::string("cannot resume: ") + e.what());
    }
    if (persisted.columns != columns_) {
        throw StartupError("persisted database columns do not match the program");
    }
    if (persisted.rows.size() != runners_.size()) {
        throw StartupError("persisted database has a different runner count");
    }
    for (std::size_t i = 0; i < runners_.size(); ++i) {
        if (persisted.rows[i].id != runners_[i].id) {
            throw StartupError("persisted database rows do not match the runner table");
        }
    }
    table_ = std::move(persisted);
    log_line("info", "resumed " + std::to_string(table_.rows.size()) + " rows from " + database_path().string());
    return true;
}

std::optional<std::size_t> Agent::resolve(const CompetitorKey& key) const {
    if (const auto* n = std::get_if<StartNumber>(&key)) {
        auto it = by_id_.find(n->value);
        return it == by_id_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
    }
    auto it = by_rfid_.find(std::get<RfidTag>(key).value);
    return it == by_rfid_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
}

void Agent::reject_locked(std::string_view origin, std::string_view why, std::string_view raw) {
    ++rejected_;
    rejects_log_ << origin << '\t' << why << '\t' << raw << '\n';
    rejects_log_.flush();
    log_line("warn", std::string(origin) + ": rejected '" + std::string(raw) + "': " + std::string(why));
}

Outcome Agent::apply_locked(const Event& event, std::string_view origin) {
    const std::string raw = format_event_line(event);
    Outcome out;

    // reconstruction: competitor and virtual machine
    auto index = resolve(event.competitor);
    if (!index) {
        reject_locked(origin, reason::kUnknownCompetitor, raw);
        out.reason = reason::kUnknownCompetitor;
        return out;
    }
    auto machine = machines_.find(event.mp);
    if (machine == machines_.end()) {
        reject_locked(origin, reason::kUnknownMp, raw);
        out.reason = reason::kUnknownMp;
        return out;
    }
    if (event.time < 0) {
        reject_locked(origin, reason::kMalformed, raw);
        out.reason = reason::kMalformed;
        return out;
    }

    // reading and mapping of results, interpretation, writing
    ResultsRow& row = table_.rows[*index];
    vm::ExecResult result = machine->second.run(store::to_vm_row(columns_, row), event.time);
    ResultsRow updated = row;
    store::from_vm_row(columns_, result.data_after, updated);
    std::swap(row, updated);
    try {
        store::write_database(database_path(), table_);
    } catch (...) {
        std::swap(row, updated);
        throw;
    }

    auto key = std::make_pair(*index, event.mp);
    auto seen = last_seen_.find(key);
    if (seen != last_seen_.end() && event.time < seen->second) {
        out.late = true;
        ++warnings_;
        warnings_log_ << origin << "\trunner " << row.id << " mp " << event.mp << ": time " << event.time
                      << " precedes previous " << seen->second << '\n';
        warnings_log_.flush();
        log_line("warn", "runner " + std::to_string(row.id) + " at mp " + std::to_string(event.mp) +
                             ": out-of-order timestamp " + std::to_string(event.time));
    }
    last_seen_[key] = seen == last_seen_.end() ? event.time : std::max(seen->second, event.time);

    ++applied_;
    events_log_ << origin << '\t' << row.id << '\t' << raw << '\n';
    events_log_.flush();

    out.applied = true;
    out.runner = row.id;
    return out;
}

Outcome Agent::process_event(const Event& event, std::string_view origin) {
    std::lock_guard lock(mu_);
    return apply_locked(event, origin);
}

std::optional<Outcome> Agent::process_line(std::string_view line, LineFormat format, std::string_view origin) {
    line = trim_eol(line);
    if (is_blank(line)) {
        return std::nullopt;
    }
    auto event = format == LineFormat::Manual ? parse_manual_line(line) : parse_online_line(line);
    std::lock_guard lock(mu_);
    if (!event) {
        reject_locked(origin, reason::kMalformed, line);
        Outcome out;
        out.reason = reason::kMalformed;
        return out;
    }
    return apply_locked(*event, origin);
}

std::filesystem::path Agent::batch_file(std::int64_t agent_id) const {
    const sema::AgentInfo* info = config_.agents().find(agent_id);
    if (info == nullptr || info->kind != ast::AgentKind::Manual) {
        throw std::invalid_argument("agent " + std::to_string(agent_id) + " is not a manual agent");
    }
    std::filesystem::path p(info->source);
    return p.is_absolute() ? p : config_.work_dir / p;
}

BatchReport Agent::run_batch(std::int64_t agent_id) {
    BatchReport report;
    const std::filesystem::path source = batch_file(agent_id);
    std::error_code ec;
    if (!std::filesystem::exists(source, ec)) {
        return report;
    }
    report.found = true;

    const std::string stamp = std::to_string(static_cast<long long>(std::time(nullptr)));
    std::filesystem::path target = config_.archive_dir / (source.filename().string() + "." + stamp);
    for (int n = 1; std::filesystem::exists(target, ec); ++n) {
        target = config_.archive_dir / (source.filename().string() + "." + stamp + "." + std::to_string(n));
    }
    std::filesystem::create_directories(config_.archive_dir, ec);
    std::filesystem::rename(source, target, ec);
    if (ec) {
        // different filesystem: copy, then delete the original
        std::error_code copy_ec;
        std::filesystem::copy_file(source, target, copy_ec);
        if (copy_ec || !std::filesystem::remove(source, copy_ec)) {
            report.error = "cannot archive " + source.string() + ": " + ec.message();
            log_line("error", report.error);
            return report;
        }
    }
    report.archived = target;

    std::string content;
    try {
        content = store::read_file(target);
    } catch (const store::StoreError& e) {
        report.error = e.what();
        log_line("error", report.error);
        return report;
    }

    const std::string origin = "manual:" + std::to_string(agent_id);
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t nl = content.find('\n', start);
        std::string_view line(content.data() + start,
                              (nl == std::string::npos ? content.size() : nl) - start);
        if (auto outcome = process_line(line, LineFormat::Manual, origin)) {
            (outcome->applied ? report.applied : report.rejected) += 1;
        }
        if (nl == std::string::npos) {
            break;
        }
        start = nl + 1;
    }
    log_line("info", origin + ": " + source.string() + ": applied " + std::to_string(report.applied) +
                         ", rejected " + std::to_string(report.rejected) + ", archived to " + target.string());
    return report;
}

std::vector<Standing> rank_table(const store::ResultsTable& table, std::span<const RunnerRecord> runners,
                                 std::string_view finish_var) {
    const int col = table.column(finish_var);
    if (col < 0) {
        throw UnknownVariable("unknown variable " + std::string(finish_var));
    }
    std::unordered_map<std::int64_t, const RunnerRecord*> by_id;
    for (const RunnerRecord& r : runners) {
        by_id.emplace(r.id, &r);
    }
    std::vector<Standing> out;
    for (const ResultsRow& row : table.rows) {
        std::int64_t v = row.cells.at(static_cast<std::size_t>(col));
        auto it = by_id.find(row.id);
        if (v > 0 && it != by_id.end()) {
            out.push_back({*it->second, v});
        }
    }
    std::sort(out.begin(), out.end(), [](const Standing& a, const Standing& b) {
        return a.value != b.value ? a.value < b.value : a.runner.id < b.runner.id;
    });
    return out;
}

std::vector<Standing> Agent::rank(std::string_view finish_var) const {
    return rank_table(snapshot(), runners_, finish_var);
}

store::ResultsTable Agent::snapshot() const {
    std::lock_guard lock(mu_);
    return table_;
}

AgentStatus Agent::status() const {
    std::lock_guard lock(mu_);
    AgentStatus s;
    s.runners = runners_.size();
    s.applied = applied_;
    s.rejected = rejected_;
    s.warnings = warnings_;
    s.resumed = resumed_;
    for (const auto& [mp, machine] : machines_) {
        s.places.push_back(mp);
    }
    return s;
}

}  // namespace easytime::agent
