// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "easytime/codegen.hpp"
#include "easytime/store.hpp"
#include "easytime/vm.hpp"

namespace easytime::agent {

using store::ResultsRow;
using store::RunnerRecord;

struct StartNumber {
    std::int64_t value = 0;
    bool operator==(const StartNumber&) const = default;
};

struct RfidTag {
    std::string value;
    bool operator==(const RfidTag&) const = default;
};

using CompetitorKey = std::variant<StartNumber, RfidTag>;

/// One crossing: who, where, when (seconds since 1970-01-01T00:00:00Z).
struct Event {
    CompetitorKey competitor;
    std::int64_t mp = 0;
    std::int64_t time = 0;

    bool operator==(const Event&) const = default;
};

/// `#;MP;TIME` with three integer fields.
std::optional<Event> parse_manual_line(std::string_view line);
/// `RFID;MP;TIME`, the tag being any nonempty text without `;`.
std::optional<Event> parse_online_line(std::string_view line);
/// Manual layout for start numbers, online layout for tags.
std::string format_event_line(const Event& event);

enum class LineFormat { Manual, Online };

class StartupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownVariable : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct AgentConfig {
    codegen::CompiledProgram pgm;
    std::chrono::milliseconds poll_interval{1000};
    std::filesystem::path data_dir{"."};     // stores and logs
    std::filesystem::path archive_dir;       // defaults to data_dir/archive
    std::filesystem::path work_dir{"."};     // base for relative manual file specs
    bool resume = true;                      // pick up a persisted DATABASE if present

    const sema::AgentTable& agents() const { return pgm.agents; }
};

namespace reason {
inline constexpr std::string_view kMalformed = "malformed line";
inline constexpr std::string_view kUnknownCompetitor = "unknown competitor";
inline constexpr std::string_view kUnknownMp = "unknown mp";
}  // namespace reason

struct Outcome {
    bool applied = false;
    std::string reason;               // set when rejected
    std::optional<std::int64_t> runner;
    bool late = false;                // applied, but older than the previous crossing at this mp
};

struct BatchReport {
    bool found = false;
    std::size_t applied = 0;
    std::size_t rejected = 0;
    std::filesystem::path archived;
    std::string error;                // I/O trouble; the file is retried next poll
};

struct AgentStatus {
    std::size_t runners = 0;
    std::size_t applied = 0;
    std::size_t rejected = 0;
    std::size_t warnings = 0;
    bool resumed = false;
    std::vector<std::int64_t> places;
};

struct Standing {
    RunnerRecord runner;
    std::int64_t value = 0;

    bool operator==(const Standing&) const = default;
};

/// The monitoring agent: RUNNERS, DATABASE and the loaded program, with
/// every mutation funneled through one lock. Each applied event is written
/// through to `database.txt` before the call returns, so the persisted table
/// never trails the in-memory one.
///
/// Files under data_dir: pgm.txt (+ .schema), runners.txt, database.txt,
/// events.log (applied events in order), rejects.log (quarantined input),
/// warnings.log (late events).
class Agent {
public:
    /// Validates runners, loads code once and sets every row to the declared
    /// initial values, or to the persisted table when resuming.
    Agent(AgentConfig config, std::vector<RunnerRecord> runners);

    Agent(const Agent&) = delete;
    Agent& operator=(const Agent&) = delete;

    Outcome process_event(const Event& event, std::string_view origin = "direct");

    /// Parses and applies one input line; malformed lines are quarantined.
    /// Blank lines are not records and are ignored.
    std::optional<Outcome> process_line(std::string_view line, LineFormat format, std::string_view origin);

    /// One poll of a manual agent's event file. The file is claimed by moving
    /// it to archive_dir/<name>.<unix-ts>, then its lines are applied in order.
    BatchReport run_batch(std::int64_t agent_id);

    /// Runners with a positive value in `finish_var`, ascending, ties by id.
    std::vector<Standing> rank(std::string_view finish_var) const;

    store::ResultsTable snapshot() const;
    AgentStatus status() const;

    const std::vector<RunnerRecord>& runners() const { return runners_; }
    const codegen::CompiledProgram& program() const { return config_.pgm; }
    const AgentConfig& config() const { return config_; }

    std::filesystem::path batch_file(std::int64_t agent_id) const;
    std::filesystem::path database_path() const { return config_.data_dir / "database.txt"; }
    std::filesystem::path events_log_path() const { return config_.data_dir / "events.log"; }
    std::filesystem::path rejects_log_path() const { return config_.data_dir / "rejects.log"; }
    std::filesystem::path warnings_log_path() const { return config_.data_dir / "warnings.log"; }

private:
    Outcome apply_locked(const Event& event, std::string_view origin);
    void reject_locked(std::string_view origin, std::string_view why, std::string_view raw);
    std::optional<std::size_t> resolve(const CompetitorKey& key) const;
    bool resume_from_store();

    AgentConfig config_;
    std::vector<RunnerRecord> runners_;
    std::unordered_map<std::int64_t, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> by_rfid_;
    std::map<std::int64_t, vm::VmInstance> machines_;
    std::vector<std::string> columns_;

    mutable std::mutex mu_;
    store::ResultsTable table_;
    std::map<std::pair<std::size_t, std::int64_t>, std::int64_t> last_seen_;
    std::ofstream events_log_;
    std::ofstream rejects_log_;
    std::ofstream warnings_log_;
    std::size_t applied_ = 0;
    std::size_t rejected_ = 0;
    std::size_t warnings_ = 0;
    bool resumed_ = false;
};

/// Runners with a positive value in `finish_var`, ascending, ties by id.
/// Throws UnknownVariable when the table has no such column.
std::vector<Standing> rank_table(const store::ResultsTable& table, std::span<const RunnerRecord> runners,
                                 std::string_view finish_var);

/// Diagnostic output on stderr; silenced by set_verbose(false).
void log_line(std::string_view level, std::string_view message);
void set_verbose(bool on);

}  // namespace easytime::agent
