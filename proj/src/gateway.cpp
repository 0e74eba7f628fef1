#include "agentkernel/gateway.hpp"

#include <atomic>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <httplib.h>

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

namespace {

struct RunEntry {
    std::string run_id;
    std::string task_id;
    std::unique_ptr<Run> run;
    EventLog log;

    std::mutex mutex;
    /// Reduced from the emitted events; what GET endpoints report.
    RunRecord view;
    std::string updated_at;
    /// Set when a verdict has been accepted for the current pause.
    bool verdict_claimed = false;
    std::thread worker;
};

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                json details = json::object()) {
    res.status = status;
    res.set_content(json{{"code", code}, {"message", message}, {"details", std::move(details)}}.dump(),
                    "application/json");
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

} // namespace

struct Gateway::Impl {
    HarnessConfig config;
    GatewayOptions options;
    std::optional<TranscriptStore> store;
    httplib::Server server;
    std::thread server_thread;
    int bound_port = -1;
    std::atomic<bool> stopping{false};

    std::mutex runs_mutex;
    std::vector<std::shared_ptr<RunEntry>> runs;
    std::mt19937_64 rng{std::random_device{}()};
    std::uint64_t counter = 0;

    Impl(HarnessConfig c, GatewayOptions o) : config(std::move(c)), options(std::move(o)) {
        if (options.store_dir) store.emplace(*options.store_dir);
        routes();
    }

    std::shared_ptr<RunEntry> find(const std::string& id) {
        std::lock_guard lock(runs_mutex);
        for (const auto& r : runs) {
            if (r->run_id == id) return r;
        }
        return nullptr;
    }

    std::string next_run_id() {
        std::lock_guard lock(runs_mutex);
        char buf[40];
        std::snprintf(buf, sizeof buf, "run-%04llu-%08llx", static_cast<unsigned long long>(++counter),
                      static_cast<unsigned long long>(rng() & 0xffffffffULL));
        return buf;
    }

    static json summary(RunEntry& e) {
        std::lock_guard lock(e.mutex);
        return json{{"run_id", e.run_id},
                    {"task_id", e.task_id},
                    {"goal", e.view.goal.text},
                    {"status", e.view.status},
                    {"round", e.view.rounds.empty() ? 0 : static_cast<int>(e.view.rounds.size()) - 1},
                    {"updated_at", e.updated_at},
                    {"events", e.view.events.size()}};
    }

    void on_event(RunEntry& e, const StageEvent& ev) {
        RunStatus status;
        {
            std::lock_guard lock(e.mutex);
            apply_event(e.view, ev);
            e.updated_at = ev.timestamp;
            status = e.view.status;
            if (status != RunStatus::awaiting_human) e.verdict_claimed = false;
        }
        if (store) store->append(e.run_id, ev);
        e.log.append(ev);
        if (is_terminal(status)) e.log.close();
    }

    void start_run(const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) return send_error(res, 400, "bad_request", "body must be a JSON object");

        Setup setup = Setup::group;
        std::optional<EvaluatorKind> evaluator;
        try {
            if (body.contains("setup")) setup = parse_enum<Setup>(body["setup"].get<std::string>(), "setup");
            if (body.contains("evaluator")) {
                evaluator = parse_enum<EvaluatorKind>(body["evaluator"].get<std::string>(), "evaluator kind");
            }
        } catch (const std::exception& ex) {
            return send_error(res, 400, "bad_request", ex.what());
        }

        TaskSpec task;
        if (body.contains("task")) {
            try {
                task = task_from_json(body["task"]);
                task.validate();
            } catch (const FieldError& ex) {
                return send_error(res, 400, "invalid_task", ex.what(), json{{"field", ex.field()}});
            } catch (const std::exception& ex) {
                return send_error(res, 400, "invalid_task", ex.what());
            }
        } else if (body.contains("task_id") && body["task_id"].is_string()) {
            try {
                task = config.task(body["task_id"].get<std::string>());
            } catch (const NotFoundError& ex) {
                return send_error(res, 404, "not_found", ex.what(), json{{"task_id", body["task_id"]}});
            }
        } else {
            return send_error(res, 400, "bad_request", "request needs task_id or task", json{{"field", "task_id"}});
        }

        auto entry = std::make_shared<RunEntry>();
        entry->run_id = next_run_id();
        entry->task_id = task.id;
        RunRequest request;
        request.run_id = entry->run_id;
        request.setup = setup;
        request.provider = body.value("provider", std::string{});
        request.evaluator = evaluator;
        if (body.contains("script")) request.script = body["script"];
        RunEntry* raw = entry.get();
        request.sink = [this, raw](const StageEvent& ev) { on_event(*raw, ev); };
        try {
            entry->run = prepare_run(config, task, request);
        } catch (const FieldError& ex) {
            return send_error(res, 400, "invalid_task", ex.what(), json{{"field", ex.field()}});
        } catch (const NotFoundError& ex) {
            return send_error(res, 400, "bad_request", ex.what());
        } catch (const std::exception& ex) {
            return send_error(res, 400, "invalid_run", ex.what());
        }
        entry->view.goal = task.goal;
        {
            std::lock_guard lock(runs_mutex);
            runs.push_back(entry);
        }
        entry->worker = std::thread([entry] {
            try {
                entry->run->start();
            } catch (const std::exception&) {
                // start() records failures as aborted events; anything else leaves the log open.
                entry->log.close();
            }
        });
        send_json(res, 202, json{{"run_id", entry->run_id}});
    }

    void submit_feedback(RunEntry& entry, const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) return send_error(res, 400, "bad_request", "body must be a JSON object");
        if (!body.contains("solved") || !body["solved"].is_boolean()) {
            return send_error(res, 422, "invalid_verdict", "field 'solved' must be a boolean", json{{"field", "solved"}});
        }
        Verdict verdict;
        verdict.solved = body["solved"].get<bool>();
        verdict.feedback = body.value("feedback", std::string{});
        if (body.contains("score") && body["score"].is_number()) verdict.score = body["score"].get<double>();
        try {
            verdict.validate();
        } catch (const ValidationError& ex) {
            return send_error(res, 422, "invalid_verdict", ex.what(), json{{"field", "feedback"}});
        }

        std::lock_guard lock(entry.mutex);
        if (entry.view.status != RunStatus::awaiting_human || entry.verdict_claimed) {
            return send_error(res, 409, "conflict", "run is not awaiting a human verdict",
                              json{{"status", entry.view.status}});
        }
        entry.verdict_claimed = true;
        std::thread previous = std::move(entry.worker);
        RunEntry* target = &entry;
        entry.worker = std::thread([target, verdict, previous = std::move(previous)]() mutable {
            if (previous.joinable()) previous.join();
            try {
                target->run->resume(verdict);
            } catch (const std::exception&) {
                target->log.close();
            }
        });
        res.status = 204;
    }

    void stream_events(const std::shared_ptr<RunEntry>& entry, std::size_t from, httplib::Response& res) {
        auto poll = options.stream_poll;
        res.set_chunked_content_provider(
            "application/x-ndjson", [this, entry, next = from, poll](std::size_t, httplib::DataSink& sink) mutable {
                if (stopping) {
                    sink.done();
                    return true;
                }
                bool closed = entry->log.closed();
                auto events = entry->log.read_from(next, poll);
                for (const auto& ev : events) {
                    std::string line = canonical_line(ev) + "\n";
                    if (!sink.write(line.data(), line.size())) return false;
                    ++next;
                }
                if (events.empty() && closed && next >= entry->log.size()) sink.done();
                return true;
            });
    }

    void routes() {
        server.Post("/v1/runs", [this](const httplib::Request& req, httplib::Response& res) { start_run(req, res); });

        server.Get("/v1/runs", [this](const httplib::Request&, httplib::Response& res) {
            std::vector<std::shared_ptr<RunEntry>> snapshot;
            {
                std::lock_guard lock(runs_mutex);
                snapshot = runs;
            }
            json out = json::array();
            for (const auto& r : snapshot) out.push_back(summary(*r));
            send_json(res, 200, out);
        });

        server.Get(R"(/v1/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = find(req.matches[1]);
            if (!entry) return send_error(res, 404, "not_found", "unknown run", json{{"run_id", req.matches[1]}});
            json out = summary(*entry);
            {
                std::lock_guard lock(entry->mutex);
                out["record"] = record_summary(entry->view);
            }
            send_json(res, 200, out);
        });

        server.Get(R"(/v1/runs/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = find(req.matches[1]);
            if (!entry) return send_error(res, 404, "not_found", "unknown run", json{{"run_id", req.matches[1]}});
            std::size_t from = 0;
            if (req.has_param("from")) {
                std::string raw = req.get_param_value("from");
                try {
                    std::size_t used = 0;
                    long long v = std::stoll(raw, &used);
                    if (used != raw.size() || v < 0) throw std::invalid_argument("from");
                    from = static_cast<std::size_t>(v);
                } catch (const std::exception&) {
                    return send_error(res, 400, "bad_request", "from must be a non-negative integer",
                                      json{{"field", "from"}});
                }
            }
            stream_events(entry, from, res);
        });

        server.Post(R"(/v1/runs/([^/]+)/feedback)", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = find(req.matches[1]);
            if (!entry) return send_error(res, 404, "not_found", "unknown run", json{{"run_id", req.matches[1]}});
            submit_feedback(*entry, req, res);
        });

        server.Get("/v1/tasks", [this](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& [id, t] : config.tasks) {
                out.push_back({{"id", id}, {"suite", t.suite}, {"kind", t.goal.task_kind}, {"goal", t.goal.text}});
            }
            send_json(res, 200, out);
        });

        if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
    }

    int bind() {
        if (options.port == 0) {
            bound_port = server.bind_to_any_port(options.host);
        } else {
            bound_port = server.bind_to_port(options.host, options.port) ? options.port : -1;
        }
        if (bound_port < 0) {
            throw ConfigError("cannot bind " + options.host + ":" + std::to_string(options.port));
        }
        return bound_port;
    }

    void join_runs() {
        std::vector<std::shared_ptr<RunEntry>> snapshot;
        {
            std::lock_guard lock(runs_mutex);
            snapshot = runs;
        }
        for (const auto& r : snapshot) {
            std::thread worker;
            {
                std::lock_guard lock(r->mutex);
                worker = std::move(r->worker);
            }
            if (worker.joinable()) worker.join();
        }
    }
};

Gateway::Gateway(HarnessConfig config, GatewayOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

Gateway::~Gateway() { stop(); }

int Gateway::start() {
    int port = impl_->bind();
    impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Gateway::serve() {
    impl_->bind();
    impl_->server.listen_after_bind();
}

void Gateway::stop() {
    if (!impl_ || impl_->stopping.exchange(true)) return;
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
    impl_->join_runs();
}

int Gateway::port() const { return impl_->bound_port; }

} // namespace agentkernel
