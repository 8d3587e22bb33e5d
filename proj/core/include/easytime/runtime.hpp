// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "easytime/agent.hpp"

namespace easytime::agent {

/// TCP listener for one automatic agent. The timing device (or the
/// simulator) connects as a client and streams `RFID;MP;TIME` lines; each
/// line is applied as soon as it is complete, in arrival order. One device
/// connection is served at a time; when it drops, the listener accepts the
/// next one.
class OnlineListener {
public:
    OnlineListener(Agent& agent, std::int64_t agent_id, std::uint16_t port, std::string bind_address = "0.0.0.0");
    ~OnlineListener();

    OnlineListener(const OnlineListener&) = delete;
    OnlineListener& operator=(const OnlineListener&) = delete;

    /// Binds and starts the accept thread. Throws StartupError when the
    /// address cannot be bound.
    void start();
    void stop();

    /// Bound port; differs from the requested one when that was 0.
    std::uint16_t port() const { return bound_port_; }
    std::size_t sessions() const { return sessions_.load(); }
    std::size_t lines() const { return lines_.load(); }

private:
    void serve();
    void session(int fd);

    Agent& agent_;
    std::int64_t agent_id_;
    std::uint16_t requested_port_;
    std::string bind_address_;
    std::uint16_t bound_port_ = 0;
    int listen_fd_ = -1;
    std::atomic<bool> stop_{false};
    std::atomic<std::size_t> sessions_{0};
    std::atomic<std::size_t> lines_{0};
    std::thread thread_;
};

/// Polls the event files of manual agents at a fixed interval.
class BatchPoller {
public:
    BatchPoller(Agent& agent, std::vector<std::int64_t> agent_ids, std::chrono::milliseconds interval);
    ~BatchPoller();

    BatchPoller(const BatchPoller&) = delete;
    BatchPoller& operator=(const BatchPoller&) = delete;

    void start();
    void stop();
    std::size_t polls() const { return polls_.load(); }

private:
    void loop();

    Agent& agent_;
    std::vector<std::int64_t> agent_ids_;
    std::chrono::milliseconds interval_;
    std::atomic<bool> stop_{false};
    std::atomic<std::size_t> polls_{0};
    std::thread thread_;
};

struct RuntimeOptions {
    std::uint16_t device_port_base = 7700;       // agent n listens on base + n
    std::map<std::int64_t, std::uint16_t> ports;  // per-agent overrides (0 = ephemeral)
    std::string bind_address = "0.0.0.0";
};

/// Every ingestion source of an agent: one poller for all manual agents and
/// one listener per automatic agent.
class Runtime {
public:
    Runtime(Agent& agent, RuntimeOptions options = {});
    ~Runtime();

    void start();
    void stop();

    /// Port the listener of an automatic agent is bound to.
    std::uint16_t device_port(std::int64_t agent_id) const;

private:
    Agent& agent_;
    RuntimeOptions options_;
    std::unique_ptr<BatchPoller> poller_;
    std::map<std::int64_t, std::unique_ptr<OnlineListener>> listeners_;
};

}  // namespace easytime::agent
