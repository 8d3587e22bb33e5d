// SPDX-License-Identifier: Apache-2.0

#include "easytime/simulator.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <memory>
#include <random>
#include <stdexcept>
#include <system_error>
#include <thread>

namespace easytime::sim {

namespace {

// mt19937_64 output is fixed by the standard, unlike the distributions.
std::int64_t draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) {
        return lo;
    }
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(rng() % span);
}

std::string lines(const Scenario& scenario, const std::set<std::int64_t>& mps, bool manual) {
    std::string out;
    for (const PlannedEvent& e : scenario.plan) {
        if (!mps.contains(e.mp)) {
            continue;
        }
        out += agent::format_event_line(manual ? e.as_manual() : e.as_online());
        out += '\n';
    }
    return out;
}

std::size_t count_at(const Scenario& scenario, const std::set<std::int64_t>& mps) {
    return static_cast<std::size_t>(std::count_if(scenario.plan.begin(), scenario.plan.end(),
                                                  [&](const PlannedEvent& e) { return mps.contains(e.mp); }));
}

class Socket {
public:
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket() {
        if (fd_ >= 0) {
            ::close(fd_);
        }
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    int get() const { return fd_; }

private:
    int fd_;
};

}  // namespace

std::vector<Leg> triathlon_legs() {
    return {
        {1, 20, 240, 420, 240, 420},   // 380 m swim laps
        {2, 1, 60, 300, 1, 1},         // leaving transition 1
        {3, 105, 300, 600, 300, 600},  // 3.4 km bike laps
        {4, 55, 60, 300, 360, 720},    // first crossing ends transition 2, then 1.5 km run laps
    };
}

std::vector<std::int64_t> Scenario::finish_order() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> last;  // (time, id)
    for (const RunnerRecord& r : runners) {
        std::int64_t t = -1;
        for (const PlannedEvent& e : plan) {
            if (e.runner_id == r.id) {
                t = std::max(t, e.time);
            }
        }
        if (t >= 0) {
            last.emplace_back(t, r.id);
        }
    }
    std::sort(last.begin(), last.end());
    std::vector<std::int64_t> out;
    for (const auto& [t, id] : last) {
        out.push_back(id);
    }
    return out;
}

std::vector<PlannedEvent> Scenario::events_for(std::int64_t runner_id) const {
    std::vector<PlannedEvent> out;
    std::copy_if(plan.begin(), plan.end(), std::back_inserter(out),
                 [&](const PlannedEvent& e) { return e.runner_id == runner_id; });
    return out;
}

std::vector<PlannedEvent> Scenario::events_at(const std::set<std::int64_t>& mps) const {
    std::vector<PlannedEvent> out;
    std::copy_if(plan.begin(), plan.end(), std::back_inserter(out),
                 [&](const PlannedEvent& e) { return mps.contains(e.mp); });
    return out;
}

Scenario build_course(std::vector<RunnerRecord> runners, const std::vector<Leg>& legs, std::uint64_t seed,
                      std::int64_t start_time) {
    Scenario sc;
    sc.seed = seed;
    std::mt19937_64 rng(seed);
    for (const RunnerRecord& r : runners) {
        std::int64_t t = start_time;
        for (const Leg& leg : legs) {
            for (int k = 0; k < leg.crossings; ++k) {
                t += k == 0 ? draw(rng, std::max<std::int64_t>(1, leg.first_gap_min), leg.first_gap_max)
                            : draw(rng, std::max<std::int64_t>(1, leg.lap_gap_min), leg.lap_gap_max);
                sc.plan.push_back({r.id, r.rfid, leg.mp, t});
            }
        }
    }
    std::stable_sort(sc.plan.begin(), sc.plan.end(), [](const PlannedEvent& a, const PlannedEvent& b) {
        return a.time != b.time ? a.time < b.time : a.runner_id < b.runner_id;
    });
    sc.runners = std::move(runners);
    return sc;
}

Scenario build_triathlon(std::vector<RunnerRecord> runners, std::uint64_t seed) {
    return build_course(std::move(runners), triathlon_legs(), seed);
}

std::vector<RunnerRecord> make_runners(std::size_t count) {
    static const char* const kLast[] = {"Novak", "Horvat", "Kranjc", "Zupan", "Potocnik", "Mlakar", "Vidmar"};
    static const char* const kFirst[] = {"Ana", "Luka", "Maja", "Jan", "Nina", "Tim", "Eva"};
    std::vector<RunnerRecord> out;
    for (std::size_t i = 1; i <= count; ++i) {
        out.push_back({static_cast<std::int64_t>(i), "T" + std::to_string(i), kLast[(i - 1) % 7], kFirst[(i - 1) % 7]});
    }
    return out;
}

std::set<std::int64_t> places_of_kind(const codegen::CompiledProgram& program, ast::AgentKind kind) {
    std::set<std::int64_t> out;
    for (const auto& [mp, agent_id] : program.place_agents) {
        const sema::AgentInfo* info = program.agents.find(agent_id);
        if (info != nullptr && info->kind == kind) {
            out.insert(mp);
        }
    }
    return out;
}

std::string batch_text(const Scenario& scenario, const std::set<std::int64_t>& mps) {
    return lines(scenario, mps, true);
}

std::string online_text(const Scenario& scenario, const std::set<std::int64_t>& mps) {
    return lines(scenario, mps, false);
}

std::size_t emit_batch(const Scenario& scenario, const std::set<std::int64_t>& mps,
                       const std::filesystem::path& path) {
    if (std::filesystem::exists(path)) {
        throw std::runtime_error(path.string() + " already exists; the agent has not consumed it yet");
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    store::write_atomic(path, batch_text(scenario, mps));
    return count_at(scenario, mps);
}

void send_text(const std::string& host, std::uint16_t port, std::string_view text,
               std::chrono::milliseconds connect_timeout) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found); rc != 0) {
        throw std::runtime_error("resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);

    const auto deadline = std::chrono::steady_clock::now() + connect_timeout;
    while (true) {
        Socket sock(::socket(found->ai_family, found->ai_socktype | SOCK_CLOEXEC, found->ai_protocol));
        if (sock.get() < 0) {
            throw std::system_error(errno, std::generic_category(), "socket");
        }
        if (::connect(sock.get(), found->ai_addr, found->ai_addrlen) == 0) {
            std::size_t sent = 0;
            while (sent < text.size()) {
                ssize_t n = ::send(sock.get(), text.data() + sent, text.size() - sent, MSG_NOSIGNAL);
                if (n < 0) {
                    if (errno == EINTR) {
                        continue;
                    }
                    throw std::system_error(errno, std::generic_category(), "send");
                }
                sent += static_cast<std::size_t>(n);
            }
            ::shutdown(sock.get(), SHUT_WR);
            // wait for the agent to close its side so every line is consumed
            char sink[64];
            while (::recv(sock.get(), sink, sizeof(sink), 0) > 0) {
            }
            return;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            throw std::system_error(errno, std::generic_category(),
                                    "connect " + host + ":" + std::to_string(port));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

std::size_t emit_online(const Scenario& scenario, const std::set<std::int64_t>& mps, const std::string& host,
                        std::uint16_t port, std::chrono::milliseconds connect_timeout) {
    send_text(host, port, online_text(scenario, mps), connect_timeout);
    return count_at(scenario, mps);
}

}  // namespace easytime::sim
