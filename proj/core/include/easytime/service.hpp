// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "easytime/agent.hpp"

namespace easytime::service {

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// A manual trigger from the operator console.
struct ApiEvent {
    std::int64_t start_number = 0;
    std::int64_t mp = 0;
    std::optional<std::int64_t> time;     // server clock when absent
    std::optional<std::string> press_id;  // client token for duplicate suppression
};

using Clock = std::function<std::int64_t()>;

/// Seconds since the epoch from the system clock.
std::int64_t system_clock_seconds();

/// Transport-independent request handlers. Bodies are JSON; the field names
/// are listed in docs/api.md.
class Api {
public:
    Api(agent::Agent& agent, Clock clock = system_clock_seconds,
        std::chrono::seconds dedup_window = std::chrono::seconds(10));

    /// `text/plain` yields the DATABASE table layout; anything else JSON.
    ApiResponse get_results(std::string_view accept = {}) const;
    ApiResponse get_ranking(std::optional<std::string> var) const;
    ApiResponse post_event(std::string_view body);
    ApiResponse post_event(const ApiEvent& event);
    ApiResponse get_status() const;

private:
    agent::Agent& agent_;
    Clock clock_;
    std::chrono::seconds dedup_window_;
    std::chrono::steady_clock::time_point started_;

    struct Remembered {
        std::int64_t seen_at;
        ApiResponse response;
    };
    std::mutex dedup_mu_;
    std::map<std::string, Remembered> presses_;
};

struct ServiceOptions {
    std::string host = "0.0.0.0";
    std::uint16_t port = 8080;  // 0 picks a free port
    Clock clock = system_clock_seconds;
    std::chrono::seconds dedup_window{10};
};

/// HTTP front end: GET /results, GET /ranking?var=NAME, POST /events,
/// GET /status.
class Service {
public:
    Service(agent::Agent& agent, ServiceOptions options = {});
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and serves on a background thread. Throws std::runtime_error
    /// when the port cannot be bound.
    void start();
    void stop();
    std::uint16_t port() const;

    Api& api();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace easytime::service
