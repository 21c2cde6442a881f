#include "memsim/gateway.hpp"

#include <httplib.h>

#include <charconv>
#include <stdexcept>
#include <thread>

#include "memsim/export.hpp"
#include "memsim/metrics.hpp"

namespace memsim {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::vector<FieldIssue>& issues = {}) {
    Json body;
    body["error"] = message;
    if (!issues.empty()) {
        Json list = Json::array();
        for (const auto& issue : issues) list.push_back({{"field", issue.field}, {"message", issue.message}});
        body["issues"] = std::move(list);
    }
    send_json(res, status, body);
}

// Maps engine exceptions onto status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const ParseError& e) {
        send_error(res, 400, e.what());
    } catch (const ValidationError& e) {
        send_error(res, 422, e.what(), e.issues());
    } catch (const ReferenceMismatch& e) {
        send_error(res, 422, e.what());
    } catch (const LifecycleError& e) {
        send_error(res, 409, e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

std::optional<std::uint64_t> parse_id(const std::string& text) {
    std::uint64_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string sse_frame(const TelemetryFrame& f) {
    return "id: " + std::to_string(f.seq) + "\nevent: " + f.event + "\ndata: " + f.data + "\n\n";
}

Json session_body(const SessionActor& actor) {
    Json j = to_json(actor.summary());
    j["config"] = to_json(actor.config());
    return j;
}

}  // namespace

GatewayOptions gateway_options_from_json(const Json& j, GatewayOptions base) {
    if (!j.is_object()) throw ParseError("gateway config: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const Json& v = it.value();
        if (key == "host" && v.is_string()) {
            base.host = v.get<std::string>();
        } else if (key == "port" && v.is_number_unsigned() && v.get<std::uint64_t>() <= 65535) {
            base.port = static_cast<int>(v.get<std::uint64_t>());
        } else if (key == "expose" && v.is_boolean()) {
            if (v.get<bool>()) base.host = "0.0.0.0";
        } else if (key == "pace" && v.is_number() && v.get<double>() >= 0.0) {
            base.actor.pace = v.get<double>();
        } else if (key == "telemetry_buffer" && v.is_number_unsigned() && v.get<std::uint64_t>() > 0) {
            base.actor.telemetry_buffer = v.get<std::size_t>();
        } else if (key == "default_decimation" && v.is_number_unsigned() && v.get<std::uint64_t>() > 0) {
            base.default_decimation = v.get<std::uint64_t>();
        } else {
            throw ParseError("gateway config: bad or unknown field \"" + key + "\"");
        }
    }
    return base;
}

struct Gateway::Impl {
    explicit Impl(GatewayOptions opts) : options(std::move(opts)), manager(options.actor) {}

    GatewayOptions options;
    SessionManager manager;
    httplib::Server server;
    std::thread thread;
    int port = -1;

    std::shared_ptr<SessionActor> lookup(const httplib::Request& req, httplib::Response& res) {
        auto id = parse_id(req.matches[1]);
        auto actor = id ? manager.find(*id) : nullptr;
        if (!actor) send_error(res, 404, "unknown session " + std::string(req.matches[1]));
        return actor;
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                ScenarioConfig cfg = scenario_from_json(parse_json(req.body));
                auto actor = manager.create(std::move(cfg));
                Json body;
                body["id"] = actor->id();
                body["state"] = to_string(actor->summary().state);
                body["config"] = to_json(actor->config());
                send_json(res, 201, body);
            });
        });

        server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
            Json list = Json::array();
            for (const auto& actor : manager.list()) list.push_back(to_json(actor->summary()));
            send_json(res, 200, list);
        });

        server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            if (auto actor = lookup(req, res)) send_json(res, 200, session_body(*actor));
        });

        server.Post(R"(/sessions/([^/]+)/command)", [this](const httplib::Request& req, httplib::Response& res) {
            auto actor = lookup(req, res);
            if (!actor) return;
            guarded(res, [&] {
                const Json body = parse_json(req.body);
                if (!body.is_object() || !body.contains("command") || !body["command"].is_string()) {
                    throw ParseError("command: expected {\"command\": \"start\" | \"pause\" | \"reset\"}");
                }
                for (auto it = body.begin(); it != body.end(); ++it) {
                    if (it.key() != "command" && it.key() != "until") throw ParseError(it.key() + ": unknown field");
                }
                std::optional<double> until;
                if (body.contains("until") && !body["until"].is_null()) {
                    if (!body["until"].is_number()) throw ParseError("until: expected a number");
                    until = body["until"].get<double>();
                }
                const std::string cmd = body["command"].get<std::string>();
                if (cmd == "start") {
                    actor->start(until);
                } else if (cmd == "pause") {
                    actor->pause();
                } else if (cmd == "reset") {
                    actor->reset();
                } else {
                    throw ParseError("command: unknown command \"" + cmd + "\"");
                }
                send_json(res, 200, to_json(actor->summary()));
            });
        });

        server.Post(R"(/sessions/([^/]+)/attack)", [this](const httplib::Request& req, httplib::Response& res) {
            auto actor = lookup(req, res);
            if (!actor) return;
            guarded(res, [&] {
                const AttackConfig attack = attack_from_json(parse_json(req.body));
                const SessionEvent event = actor->apply_attack(attack);
                send_json(res, 200, event_payload(event));
            });
        });

        server.Get(R"(/sessions/([^/]+)/telemetry)", [this](const httplib::Request& req, httplib::Response& res) {
            auto actor = lookup(req, res);
            if (!actor) return;
            std::uint64_t decimation = options.default_decimation;
            if (req.has_param("decimation")) {
                auto parsed = parse_id(req.get_param_value("decimation"));
                if (!parsed || *parsed == 0) {
                    send_error(res, 400, "decimation must be a positive integer");
                    return;
                }
                decimation = *parsed;
            }
            auto sub = actor->telemetry().subscribe(decimation);
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream",
                [sub](std::size_t, httplib::DataSink& sink) {
                    if (auto frame = sub->next(std::chrono::milliseconds(500))) {
                        const std::string text = sse_frame(*frame);
                        return sink.write(text.data(), text.size());
                    }
                    if (sub->finished()) {
                        sink.done();
                        return true;
                    }
                    static const std::string keepalive = ": keepalive\n\n";
                    return sink.write(keepalive.data(), keepalive.size());
                },
                [actor, sub](bool) { actor->telemetry().unsubscribe(sub); });
        });

        server.Get(R"(/sessions/([^/]+)/metrics)", [this](const httplib::Request& req, httplib::Response& res) {
            auto actor = lookup(req, res);
            if (!actor) return;
            guarded(res, [&] {
                auto readable = [](const SessionActor& a) {
                    const SessionState s = a.summary().state;
                    if (s == SessionState::Running || s == SessionState::Created) {
                        throw LifecycleError("session " + std::to_string(a.id()) + " is " + to_string(s));
                    }
                };
                readable(*actor);
                const SessionLog log = actor->log_snapshot();
                Json body;
                if (req.has_param("reference")) {
                    const std::string ref_text = req.get_param_value("reference");
                    auto ref_id = parse_id(ref_text);
                    auto ref = ref_id ? manager.find(*ref_id) : nullptr;
                    if (!ref) {
                        send_error(res, 404, "unknown reference session " + ref_text);
                        return;
                    }
                    readable(*ref);
                    const SessionLog ref_log = ref->log_snapshot();
                    const MetricsReport m = compute_metrics(log, &ref_log);
                    body = to_json(m);
                    body["reference"] = ref->id();
                    body["deltas"] = metrics_delta(m, compute_metrics(ref_log, &ref_log));
                } else {
                    body = to_json(compute_metrics(log));
                }
                send_json(res, 200, body);
            });
        });

        server.Get(R"(/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
            auto actor = lookup(req, res);
            if (!actor) return;
            guarded(res, [&] {
                const std::string name = req.has_param("format") ? req.get_param_value("format") : "csv";
                LogFormat format;
                try {
                    format = parse_log_format(name);
                } catch (const std::invalid_argument& e) {
                    send_error(res, 422, e.what());
                    return;
                }
                if (actor->summary().state == SessionState::Running) {
                    throw LifecycleError("session is running; pause it before exporting");
                }
                const SessionLog log = actor->log_snapshot();
                res.status = 200;
                res.set_content(export_log(log, format), format == LogFormat::Csv ? "text/csv" : "application/json");
                res.set_header("Content-Disposition", "attachment; filename=\"session-" +
                                                          std::to_string(actor->id()) + "." + name + "\"");
            });
        });
    }
};

Gateway::Gateway(GatewayOptions options) : impl_(std::make_unique<Impl>(std::move(options))) { impl_->routes(); }

Gateway::~Gateway() { stop(); }

SessionManager& Gateway::sessions() noexcept { return impl_->manager; }

int Gateway::bind() {
    int port = impl_->options.port == 0 ? impl_->server.bind_to_any_port(impl_->options.host)
                                        : (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)
                                               ? impl_->options.port
                                               : -1);
    if (port < 0) {
        throw std::runtime_error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    impl_->port = port;
    return port;
}

void Gateway::serve() { impl_->server.listen_after_bind(); }

int Gateway::start_background() {
    const int port = bind();
    impl_->thread = std::thread([this] { serve(); });
    impl_->server.wait_until_ready();
    return port;
}

void Gateway::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace memsim
