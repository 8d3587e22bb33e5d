// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "easytime/agent.hpp"
#include "easytime/codegen.hpp"
#include "easytime/store.hpp"

namespace easytime::sim {

using store::RunnerRecord;

struct PlannedEvent {
    std::int64_t runner_id = 0;
    std::string rfid;
    std::int64_t mp = 0;
    std::int64_t time = 0;

    bool operator==(const PlannedEvent&) const = default;

    agent::Event as_manual() const { return {agent::StartNumber{runner_id}, mp, time}; }
    agent::Event as_online() const { return {agent::RfidTag{rfid}, mp, time}; }
};

/// A run of consecutive crossings of one measuring place. The first one
/// follows the previous leg by `first_gap`, later ones by `lap_gap`
/// (inclusive ranges, seconds).
struct Leg {
    std::int64_t mp = 0;
    int crossings = 0;
    std::int64_t first_gap_min = 1;
    std::int64_t first_gap_max = 1;
    std::int64_t lap_gap_min = 1;
    std::int64_t lap_gap_max = 1;
};

/// Double triathlon: 20 swim laps over MP1, one crossing of MP2 leaving the
/// first transition, 105 bike laps over MP3, 55 run crossings over MP4.
std::vector<Leg> triathlon_legs();

/// 2009-06-28T08:00:00Z, the default start gun.
inline constexpr std::int64_t kDefaultStart = 1246176000;

struct Scenario {
    std::vector<RunnerRecord> runners;
    std::vector<PlannedEvent> plan;  // global time order; ties by runner id
    std::uint64_t seed = 0;

    /// Runner ids by the time of their final planned crossing.
    std::vector<std::int64_t> finish_order() const;
    std::vector<PlannedEvent> events_for(std::int64_t runner_id) const;
    std::vector<PlannedEvent> events_at(const std::set<std::int64_t>& mps) const;
};

/// Per runner the legs are walked in order with seeded random gaps, so
/// times are strictly increasing per runner; runners are then merged.
Scenario build_course(std::vector<RunnerRecord> runners, const std::vector<Leg>& legs, std::uint64_t seed,
                      std::int64_t start_time = kDefaultStart);

Scenario build_triathlon(std::vector<RunnerRecord> runners, std::uint64_t seed);

/// Runners 1..n with tags T1..Tn.
std::vector<RunnerRecord> make_runners(std::size_t count);

/// Places whose controlling agent is manual (resp. automatic).
std::set<std::int64_t> places_of_kind(const codegen::CompiledProgram& program, ast::AgentKind kind);

/// `#;MP;TIME` lines for the selected places, plan order.
std::string batch_text(const Scenario& scenario, const std::set<std::int64_t>& mps);
/// `RFID;MP;TIME` lines for the selected places, plan order.
std::string online_text(const Scenario& scenario, const std::set<std::int64_t>& mps);

/// Atomically creates `path`. Refuses to overwrite a file the agent has
/// not consumed yet. Returns the number of events written.
std::size_t emit_batch(const Scenario& scenario, const std::set<std::int64_t>& mps,
                       const std::filesystem::path& path);

/// Connects to a listening agent, sends the lines and closes. Connection
/// attempts are retried until `connect_timeout`. Returns the event count.
std::size_t emit_online(const Scenario& scenario, const std::set<std::int64_t>& mps, const std::string& host,
                        std::uint16_t port, std::chrono::milliseconds connect_timeout = std::chrono::seconds(5));

/// Sends arbitrary text over one TCP session.
void send_text(const std::string& host, std::uint16_t port, std::string_view text,
               std::chrono::milliseconds connect_timeout = std::chrono::seconds(5));

}  // namespace easytime::sim
