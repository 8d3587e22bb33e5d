// SPDX-License-Identifier: Apache-2.0

#include "easytime/runtime.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace easytime::agent {

namespace {

constexpr int kPollMillis = 50;

std::string errno_text() { return std::strerror(errno); }

}  // namespace

OnlineListener::OnlineListener(Agent& agent, std::int64_t agent_id, std::uint16_t port, std::string bind_address)
    : agent_(agent), agent_id_(agent_id), requested_port_(port), bind_address_(std::move(bind_address)) {}

OnlineListener::~OnlineListener() { stop(); }

void OnlineListener::start() {
    if (thread_.joinable()) {
        return;
    }
    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) {
        throw StartupError("socket: " + errno_text());
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(requested_port_);
    if (::inet_pton(AF_INET, bind_address_.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw StartupError("bad bind address " + bind_address_);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(fd, 4) < 0) {
        std::string why = errno_text();
        ::close(fd);
        throw StartupError("agent " + std::to_string(agent_id_) + ": cannot listen on " + bind_address_ + ":" +
                           std::to_string(requested_port_) + ": " + why);
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    bound_port_ = ntohs(addr.sin_port);
    listen_fd_ = fd;
    stop_ = false;
    thread_ = std::thread([this] { serve(); });
    log_line("info", "agent " + std::to_string(agent_id_) + ": listening for device on port " +
                         std::to_string(bound_port_));
}

void OnlineListener::stop() {
    stop_ = true;
    if (thread_.joinable()) {
        thread_.join();
    }
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
}

void OnlineListener::serve() {
    while (!stop_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        int ready = ::poll(&pfd, 1, kPollMillis);
        if (ready <= 0) {
            if (ready < 0 && errno != EINTR) {
                log_line("error", "agent " + std::to_string(agent_id_) + ": poll: " + errno_text());
            }
            continue;
        }
        int conn = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (conn < 0) {
            log_line("error", "agent " + std::to_string(agent_id_) + ": accept: " + errno_text());
            continue;
        }
        session(conn);
        ::close(conn);
        ++sessions_;
    }
}

void OnlineListener::session(int fd) {
    const std::string origin = "auto:" + std::to_string(agent_id_);
    std::string pending;
    char buf[4096];
    auto apply = [&](std::string_view line) {
        ++lines_;
        try {
            agent_.process_line(line, LineFormat::Online, origin);
        } catch (const std::exception& e) {
            // a store write failure must not take the listener down with it
            log_line("error", origin + ": " + e.what());
        }
    };
    while (!stop_) {
        pollfd pfd{fd, POLLIN, 0};
        int ready = ::poll(&pfd, 1, kPollMillis);
        if (ready == 0) {
            continue;
        }
        if (ready < 0) {
            if (errno == EINTR) {
                continue;
            }
            log_line("error", origin + ": poll: " + errno_text());
            break;
        }
        ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            log_line("error", origin + ": recv: " + errno_text());
            break;
        }
        if (n == 0) {
            break;
        }
        pending.append(buf, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (std::size_t nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
            apply(std::string_view(pending).substr(start, nl - start));
            start = nl + 1;
        }
        pending.erase(0, start);
    }
    // a final record without its newline still counts
    if (!pending.empty()) {
        apply(pending);
    }
}

BatchPoller::BatchPoller(Agent& agent, std::vector<std::int64_t> agent_ids, std::chrono::milliseconds interval)
    : agent_(agent), agent_ids_(std::move(agent_ids)), interval_(interval) {}

BatchPoller::~BatchPoller() { stop(); }

void BatchPoller::start() {
    if (thread_.joinable()) {
        return;
    }
    stop_ = false;
    thread_ = std::thread([this] { loop(); });
}

void BatchPoller::stop() {
    stop_ = true;
    if (thread_.joinable()) {
        thread_.join();
    }
}

void BatchPoller::loop() {
    using clock = std::chrono::steady_clock;
    while (!stop_) {
        const auto next = clock::now() + interval_;
        for (std::int64_t id : agent_ids_) {
            try {
                agent_.run_batch(id);
            } catch (const std::exception& e) {
                log_line("error", "batch poll of agent " + std::to_string(id) + ": " + e.what());
            }
        }
        ++polls_;
        while (!stop_ && clock::now() < next) {
            std::this_thread::sleep_for(std::min<clock::duration>(next - clock::now(), std::chrono::milliseconds(10)));
        }
    }
}

Runtime::Runtime(Agent& agent, RuntimeOptions options) : agent_(agent), options_(std::move(options)) {}

Runtime::~Runtime() { stop(); }

void Runtime::start() {
    std::vector<std::int64_t> manual;
    for (const auto& [id, info] : agent_.config().agents()) {
        if (info.kind == ast::AgentKind::Manual) {
            manual.push_back(id);
            continue;
        }
        auto override_port = options_.ports.find(id);
        std::uint16_t port = override_port != options_.ports.end()
                                 ? override_port->second
                                 : static_cast<std::uint16_t>(options_.device_port_base + id);
        auto listener = std::make_unique<OnlineListener>(agent_, id, port, options_.bind_address);
        listener->start();
        listeners_.emplace(id, std::move(listener));
    }
    if (!manual.empty()) {
        poller_ = std::make_unique<BatchPoller>(agent_, std::move(manual), agent_.config().poll_interval);
        poller_->start();
    }
}

void Runtime::stop() {
    if (poller_) {
        poller_->stop();
    }
    for (auto& [id, listener] : listeners_) {
        listener->stop();
    }
}

std::uint16_t Runtime::device_port(std::int64_t agent_id) const {
    auto it = listeners_.find(agent_id);
    return it == listeners_.end() ? 0 : it->second->port();
}

}  // namespace easytime::agent
