// SPDX-License-Identifier: Apache-2.0
//
// easytime: compile race programs, run the monitoring agent, feed it
// simulated crossings and print rankings.
//
//   easytime compile race.et -o pgm.txt
//   easytime agent pgm.txt runners.txt --data-dir race/ --port 8080
//   easytime simulate pgm.txt runners.txt --seed 7 --mode online
//   easytime rank race/ --var RUN

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "easytime/agent.hpp"
#include "easytime/codegen.hpp"
#include "easytime/frontend.hpp"
#include "easytime/runtime.hpp"
#include "easytime/service.hpp"
#include "easytime/simulator.hpp"
#include "easytime/store.hpp"

namespace {

namespace fs = std::filesystem;
using namespace easytime;

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternal = 2;

// Raised for anything the user can fix: bad input files, bad flags, ports
// in use. Everything else escaping a command is an internal fault.
struct UserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CompileOptions {
    fs::path source;
    fs::path out = "pgm.txt";
};

struct AgentOptions {
    fs::path pgm;
    fs::path runners;
    fs::path data_dir = ".";
    fs::path archive_dir;
    fs::path work_dir = ".";
    int poll_interval_ms = 1000;
    std::string host = "0.0.0.0";
    int port = 8080;
    int device_port_base = 7700;
    bool fresh = false;
    bool quiet = false;
};

struct SimulateOptions {
    fs::path pgm;
    fs::path runners;
    std::uint64_t seed = 1;
    std::string mode;  // empty: both
    fs::path work_dir = ".";
    std::string host = "127.0.0.1";
    int device_port_base = 7700;
    std::vector<std::string> device_ports;  // AGENT=PORT
    bool print = false;
};

struct RankOptions {
    fs::path data_dir = ".";
    std::string var;
    bool json = false;
};

codegen::CompiledProgram load_pgm(const fs::path& path) {
    try {
        return store::read_pgm(path);
    } catch (const store::StoreError& e) {
        throw UserError(e.what());
    }
}

std::vector<store::RunnerRecord> load_runners(const fs::path& path) {
    try {
        return store::read_runners(path);
    } catch (const store::StoreError& e) {
        throw UserError(e.what());
    }
}

int cmd_compile(const CompileOptions& opt) {
    std::string text;
    try {
        text = store::read_file(opt.source);
    } catch (const store::StoreError& e) {
        throw UserError(e.what());
    }

    ast::Program program;
    try {
        program = frontend::parse_source(text);
    } catch (const frontend::ParseError& e) {
        std::cerr << opt.source.string() << ":" << e.what() << "\n";
        return kUserError;
    }

    codegen::CompileResult result = codegen::compile_program(program);
    for (const sema::SemaError& err : result.errors) {
        std::cerr << opt.source.string() << ":" << sema::format_diagnostic(err) << "\n";
    }
    if (!result.program) {
        std::cerr << "compilation stopped; " << opt.out.string() << " not written\n";
        return kUserError;
    }
    try {
        store::write_pgm(opt.out, *result.program);
    } catch (const store::StoreError& e) {
        throw UserError(e.what());
    }
    std::cout << "wrote " << result.program->blocks.size() << " code blocks to " << opt.out.string() << "\n";
    return kOk;
}

std::uint16_t to_port(int value, const char* what) {
    if (value < 0 || value > 65535) {
        throw UserError(std::string(what) + " out of range: " + std::to_string(value));
    }
    return static_cast<std::uint16_t>(value);
}

int cmd_agent(const AgentOptions& opt) {
    // Block the shutdown signals before any thread exists so they all
    // inherit the mask and only sigwait below sees them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    agent::set_verbose(!opt.quiet);
    agent::AgentConfig config;
    config.pgm = load_pgm(opt.pgm);
    config.poll_interval = std::chrono::milliseconds(opt.poll_interval_ms);
    config.data_dir = opt.data_dir;
    config.archive_dir = opt.archive_dir;
    config.work_dir = opt.work_dir;
    config.resume = !opt.fresh;
    std::vector<store::RunnerRecord> runners = load_runners(opt.runners);

    std::unique_ptr<agent::Agent> agent;
    try {
        agent = std::make_unique<agent::Agent>(std::move(config), std::move(runners));
    } catch (const agent::StartupError& e) {
        throw UserError(e.what());
    }

    agent::RuntimeOptions rt_opts;
    rt_opts.bind_address = opt.host;
    // A base of 0 asks for an ephemeral port per automatic agent.
    rt_opts.device_port_base = to_port(opt.device_port_base, "device port base");
    if (opt.device_port_base == 0) {
        for (const auto& [id, info] : agent->program().agents) {
            rt_opts.ports[id] = 0;
        }
    }
    agent::Runtime runtime(*agent, rt_opts);
    service::ServiceOptions svc_opts;
    svc_opts.host = opt.host;
    svc_opts.port = to_port(opt.port, "port");
    service::Service http(*agent, svc_opts);
    try {
        runtime.start();
        http.start();
    } catch (const agent::StartupError& e) {
        throw UserError(e.what());
    } catch (const std::runtime_error& e) {
        throw UserError(e.what());
    }

    // One machine-readable line so scripts can find ephemeral ports.
    std::cout << "ready http=" << http.port();
    for (const auto& [id, info] : agent->program().agents) {
        if (info.kind == ast::AgentKind::Auto) {
            std::cout << " agent" << id << "=" << runtime.device_port(id);
        }
    }
    std::cout << std::endl;

    int sig = 0;
    sigwait(&stop_signals, &sig);
    agent::log_line("info", std::string("received ") + (sig == SIGINT ? "SIGINT" : "SIGTERM") + ", stopping");
    http.stop();
    runtime.stop();
    return kOk;
}

std::map<std::int64_t, std::uint16_t> parse_port_overrides(const std::vector<std::string>& specs) {
    std::map<std::int64_t, std::uint16_t> out;
    for (const std::string& spec : specs) {
        const auto eq = spec.find('=');
        try {
            if (eq == std::string::npos) {
                throw std::invalid_argument(spec);
            }
            out[std::stoll(spec.substr(0, eq))] = to_port(std::stoi(spec.substr(eq + 1)), "device port");
        } catch (const std::logic_error&) {
            throw UserError("expected AGENT=PORT, got '" + spec + "'");
        }
    }
    return out;
}

int cmd_simulate(const SimulateOptions& opt) {
    const codegen::CompiledProgram pgm = load_pgm(opt.pgm);
    const sim::Scenario scenario = sim::build_triathlon(load_runners(opt.runners), opt.seed);
    const auto overrides = parse_port_overrides(opt.device_ports);
    const bool batch = opt.mode.empty() || opt.mode == "batch";
    const bool online = opt.mode.empty() || opt.mode == "online";

    std::size_t sent = 0;
    for (const auto& [id, info] : pgm.agents) {
        std::set<std::int64_t> mps;
        for (const auto& [mp, owner] : pgm.place_agents) {
            if (owner == id) {
                mps.insert(mp);
            }
        }
        if (mps.empty()) {
            continue;
        }
        if (opt.print) {
            std::cout << (info.kind == ast::AgentKind::Manual ? sim::batch_text(scenario, mps)
                                                              : sim::online_text(scenario, mps));
            continue;
        }
        if (info.kind == ast::AgentKind::Manual && batch) {
            const fs::path spec(info.source);
            const fs::path target = spec.is_absolute() ? spec : opt.work_dir / spec;
            try {
                sent += sim::emit_batch(scenario, mps, target);
            } catch (const std::runtime_error& e) {
                throw UserError(e.what());
            }
            std::cerr << "agent " << id << ": wrote " << target.string() << "\n";
        } else if (info.kind == ast::AgentKind::Auto && online) {
            auto it = overrides.find(id);
            const std::uint16_t port =
                it != overrides.end() ? it->second : to_port(opt.device_port_base + static_cast<int>(id), "device port");
            try {
                sent += sim::emit_online(scenario, mps, opt.host, port);
            } catch (const std::runtime_error& e) {
                throw UserError(e.what());
            }
            std::cerr << "agent " << id << ": streamed to " << opt.host << ":" << port << "\n";
        }
    }
    if (!opt.print) {
        std::cout << "events " << sent << "\nfinish order";
        for (std::int64_t id : scenario.finish_order()) {
            std::cout << " " << id;
        }
        std::cout << "\n";
    }
    return kOk;
}

int cmd_rank(const RankOptions& opt) {
    store::ResultsTable table;
    std::vector<store::RunnerRecord> runners;
    try {
        table = store::read_database(opt.data_dir / "database.txt");
        runners = store::read_runners(opt.data_dir / "runners.txt");
    } catch (const store::StoreError& e) {
        throw UserError(e.what());
    }
    std::vector<agent::Standing> standings;
    try {
        standings = agent::rank_table(table, runners, opt.var);
    } catch (const agent::UnknownVariable& e) {
        throw UserError(e.what());
    }
    if (opt.json) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < standings.size(); ++i) {
            const auto& s = standings[i];
            out.push_back({{"place", i + 1},
                           {"id", s.runner.id},
                           {"last_name", s.runner.last_name},
                           {"first_name", s.runner.first_name},
                           {"value", s.value}});
        }
        std::cout << out.dump(2) << "\n";
        return kOk;
    }
    for (std::size_t i = 0; i < standings.size(); ++i) {
        const auto& s = standings[i];
        std::cout << i + 1 << ";" << s.runner.id << ";" << s.runner.last_name << ";" << s.runner.first_name << ";"
                  << s.value << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EasyTime race timing: compiler, agent, simulator"};
    app.set_version_flag("--version", "easytime 0.1.0");
    app.require_subcommand(1);

    CompileOptions compile;
    auto* c = app.add_subcommand("compile", "Compile a program into stack-machine code");
    c->add_option("source", compile.source, "Program source")->required()->check(CLI::ExistingFile);
    c->add_option("-o,--out", compile.out, "Output PGM file")->envname("EASYTIME_OUT")->capture_default_str();

    AgentOptions agent_opt;
    auto* a = app.add_subcommand("agent", "Run the monitoring agent and the HTTP service");
    a->add_option("pgm", agent_opt.pgm, "Compiled program")->required();
    a->add_option("runners", agent_opt.runners, "Runner table")->required();
    a->add_option("--data-dir", agent_opt.data_dir, "Stores and logs")->envname("EASYTIME_DATA_DIR")->capture_default_str();
    a->add_option("--archive-dir", agent_opt.archive_dir, "Where consumed event files go (default DATA_DIR/archive)")
        ->envname("EASYTIME_ARCHIVE_DIR");
    a->add_option("--work-dir", agent_opt.work_dir, "Base for relative event file names")
        ->envname("EASYTIME_WORK_DIR")
        ->capture_default_str();
    a->add_option("--poll-interval", agent_opt.poll_interval_ms, "Event file poll interval, ms")
        ->envname("EASYTIME_POLL_INTERVAL")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    a->add_option("--host", agent_opt.host, "Bind address")->envname("EASYTIME_HOST")->capture_default_str();
    a->add_option("--port", agent_opt.port, "HTTP port (0 = ephemeral)")->envname("EASYTIME_PORT")->capture_default_str();
    a->add_option("--device-port-base", agent_opt.device_port_base,
                  "Automatic agent n listens on BASE+n (0 = ephemeral)")
        ->envname("EASYTIME_DEVICE_PORT_BASE")
        ->capture_default_str();
    a->add_flag("--fresh", agent_opt.fresh, "Ignore a persisted database and start from initial values");
    a->add_flag("-q,--quiet", agent_opt.quiet, "No diagnostics on stderr");

    SimulateOptions sim_opt;
    auto* s = app.add_subcommand("simulate", "Generate a seeded double triathlon and deliver it");
    s->add_option("pgm", sim_opt.pgm, "Compiled program")->required();
    s->add_option("runners", sim_opt.runners, "Runner table")->required();
    s->add_option("--seed", sim_opt.seed, "RNG seed")->envname("EASYTIME_SEED")->capture_default_str();
    s->add_option("--mode", sim_opt.mode, "Deliver only batch files or only TCP streams (default both)")
        ->envname("EASYTIME_MODE")
        ->check(CLI::IsMember({"batch", "online"}));
    s->add_option("--work-dir", sim_opt.work_dir, "Base for relative event file names")
        ->envname("EASYTIME_WORK_DIR")
        ->capture_default_str();
    s->add_option("--host", sim_opt.host, "Agent address")->capture_default_str();
    s->add_option("--device-port-base", sim_opt.device_port_base, "Automatic agent n listens on BASE+n")
        ->envname("EASYTIME_DEVICE_PORT_BASE")
        ->capture_default_str();
    s->add_option("--device-port", sim_opt.device_ports, "Port for one automatic agent, AGENT=PORT");
    s->add_flag("--print", sim_opt.print, "Print the event lines instead of delivering them");

    RankOptions rank;
    auto* r = app.add_subcommand("rank", "Rank runners by a finish variable from a persisted database");
    r->add_option("data_dir", rank.data_dir, "Agent data directory")->envname("EASYTIME_DATA_DIR")->capture_default_str();
    r->add_option("--var", rank.var, "Finish variable, e.g. RUN")->required();
    r->add_flag("--json", rank.json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every usage error maps to 1.
        return app.exit(e) == 0 ? kOk : kUserError;
    }

    try {
        if (*c) {
            return cmd_compile(compile);
        }
        if (*a) {
            return cmd_agent(agent_opt);
        }
        if (*s) {
            return cmd_simulate(sim_opt);
        }
        return cmd_rank(rank);
    } catch (const UserError& e) {
        std::cerr << "easytime: " << e.what() << "\n";
        return kUserError;
    } catch (const std::exception& e) {
        std::cerr << "easytime: internal error: " << e.what() << "\n";
        return kInternal;
    }
}
