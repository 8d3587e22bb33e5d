// SPDX-License-Identifier: Apache-2.0

#include "easytime/service.hpp"

#include <httplib.h>

#include <json.hpp>
#include <thread>

namespace easytime::service {

namespace {

using Json = nlohmann::ordered_json;

ApiResponse json_response(int status, const Json& body) {
    return ApiResponse{status, "application/json", body.dump() + "\n"};
}

ApiResponse error_response(int status, std::string_view reason) {
    return json_response(status, Json{{"status", "rejected"}, {"reason", reason}});
}

Json runner_json(const store::RunnerRecord& r) {
    return Json{{"id", r.id}, {"rfid", r.rfid}, {"last_name", r.last_name}, {"first_name", r.first_name}};
}

}  // namespace

std::int64_t system_clock_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Api::Api(agent::Agent& agent, Clock clock, std::chrono::seconds dedup_window)
    : agent_(agent),
      clock_(std::move(clock)),
      dedup_window_(dedup_window),
      started_(std::chrono::steady_clock::now()) {}

ApiResponse Api::get_results(std::string_view accept) const {
    store::ResultsTable table = agent_.snapshot();
    if (accept.find("text/plain") != std::string_view::npos) {
        return ApiResponse{200, "text/plain", store::format_database(table)};
    }
    Json rows = Json::array();
    const auto& runners = agent_.runners();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const store::ResultsRow& row = table.rows[i];
        Json entry = runner_json(runners[i]);
        Json cells = Json::object();
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            cells[table.columns[c]] = row.cells[c];
        }
        entry["cells"] = std::move(cells);
        rows.push_back(std::move(entry));
    }
    return json_response(200, Json{{"columns", table.columns}, {"rows", std::move(rows)}});
}

ApiResponse Api::get_ranking(std::optional<std::string> var) const {
    if (!var || var->empty()) {
        return error_response(400, "missing query parameter 'var'");
    }
    std::vector<agent::Standing> standings;
    try {
        standings = agent_.rank(*var);
    } catch (const agent::UnknownVariable& e) {
        return error_response(400, e.what());
    }
    Json ranking = Json::array();
    for (std::size_t i = 0; i < standings.size(); ++i) {
        Json entry{{"place", i + 1}};
        entry.update(runner_json(standings[i].runner));
        entry["value"] = standings[i].value;
        ranking.push_back(std::move(entry));
    }
    return json_response(200, Json{{"var", *var}, {"ranking", std::move(ranking)}});
}

ApiResponse Api::post_event(std::string_view body) {
    Json doc = Json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        return error_response(400, "body is not a JSON object");
    }
    auto integer = [&](const char* key) -> std::optional<std::int64_t> {
        auto it = doc.find(key);
        if (it == doc.end() || !it->is_number_integer()) {
            return std::nullopt;
        }
        return it->get<std::int64_t>();
    };
    ApiEvent e;
    auto start_number = integer("start_number");
    auto mp = integer("mp");
    if (!start_number || !mp) {
        return error_response(400, "start_number and mp must be integers");
    }
    e.start_number = *start_number;
    e.mp = *mp;
    if (doc.contains("time")) {
        e.time = integer("time");
        if (!e.time) {
            return error_response(400, "time must be an integer");
        }
    }
    if (auto it = doc.find("press_id"); it != doc.end()) {
        if (!it->is_string()) {
            return error_response(400, "press_id must be a string");
        }
        e.press_id = it->get<std::string>();
    }
    return post_event(e);
}

ApiResponse Api::post_event(const ApiEvent& e) {
    const std::int64_t now = clock_();
    std::unique_lock<std::mutex> dedup;
    if (e.press_id) {
        dedup = std::unique_lock(dedup_mu_);
        std::erase_if(presses_, [&](const auto& kv) { return now - kv.second.seen_at > dedup_window_.count(); });
        if (auto it = presses_.find(*e.press_id); it != presses_.end()) {
            ApiResponse again = it->second.response;
            Json body = Json::parse(again.body);
            body["duplicate"] = true;
            again.body = body.dump() + "\n";
            return again;
        }
    }

    const std::int64_t time = e.time.value_or(now);
    agent::Outcome outcome = agent_.process_event({agent::StartNumber{e.start_number}, e.mp, time}, "api");
    Json body{{"status", outcome.applied ? "accepted" : "rejected"}};
    if (!outcome.applied) {
        body["reason"] = outcome.reason;
    }
    body["start_number"] = e.start_number;
    body["mp"] = e.mp;
    body["time"] = time;
    body["duplicate"] = false;
    if (e.press_id) {
        body["press_id"] = *e.press_id;
    }
    ApiResponse response = json_response(outcome.applied ? 200 : 422, body);
    if (e.press_id) {
        presses_[*e.press_id] = Remembered{now, response};
    }
    return response;
}

ApiResponse Api::get_status() const {
    agent::AgentStatus s = agent_.status();
    const auto uptime =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - started_).count();
    return json_response(200, Json{{"status", "ok"},
                                   {"runners", s.runners},
                                   {"places", s.places},
                                   {"applied", s.applied},
                                   {"rejected", s.rejected},
                                   {"warnings", s.warnings},
                                   {"resumed", s.resumed},
                                   {"uptime_s", uptime}});
}

struct Service::Impl {
    Impl(agent::Agent& agent, ServiceOptions opts)
        : options(std::move(opts)), api(agent, options.clock, options.dedup_window) {}

    ServiceOptions options;
    Api api;
    httplib::Server server;
    std::thread thread;
    int port = 0;
};

Service::Service(agent::Agent& agent, ServiceOptions options)
    : impl_(std::make_unique<Impl>(agent, std::move(options))) {
    auto& srv = impl_->server;
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    srv.Get("/results", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, impl_->api.get_results(req.get_header_value("Accept")));
    });
    srv.Get("/ranking", [this, reply](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::string> var;
        if (req.has_param("var")) {
            var = req.get_param_value("var");
        }
        reply(res, impl_->api.get_ranking(var));
    });
    srv.Post("/events", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, impl_->api.post_event(req.body));
    });
    srv.Get("/status", [this, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, impl_->api.get_status());
    });
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    srv.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        agent::log_line("error", "http handler: " + what);
        reply(res, error_response(500, what));
    });
}

Service::~Service() { stop(); }

void Service::start() {
    auto& impl = *impl_;
    if (impl.thread.joinable()) {
        return;
    }
    if (impl.options.port == 0) {
        impl.port = impl.server.bind_to_any_port(impl.options.host);
        if (impl.port <= 0) {
            throw std::runtime_error("cannot bind HTTP service on " + impl.options.host);
        }
    } else {
        if (!impl.server.bind_to_port(impl.options.host, impl.options.port)) {
            throw std::runtime_error("cannot bind HTTP service on " + impl.options.host + ":" +
                                     std::to_string(impl.options.port));
        }
        impl.port = impl.options.port;
    }
    impl.thread = std::thread([&impl] { impl.server.listen_after_bind(); });
    impl.server.wait_until_ready();
    agent::log_line("info", "http service on port " + std::to_string(impl.port));
}

void Service::stop() {
    if (!impl_) {
        return;
    }
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::uint16_t Service::port() const { return static_cast<std::uint16_t>(impl_->port); }

Api& Service::api() { return impl_->api; }

}  // namespace easytime::service
