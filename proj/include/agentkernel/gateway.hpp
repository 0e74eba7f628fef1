#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "agentkernel/harness.hpp"

namespace agentkernel {

struct GatewayOptions {
    /// Loopback by default; set to "0.0.0.0" to expose the service. There is no authentication.
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 8080;
    /// How long an idle event stream waits before re-checking for shutdown.
    std::chrono::milliseconds stream_poll{200};
    /// Static files served at "/" (the operator console build), if any.
    std::optional<std::filesystem::path> static_dir;
    /// Persist transcripts here as well as in memory.
    std::optional<std::filesystem::path> store_dir;
};

/// Local HTTP service for run control, event streaming, and human feedback.
///
///   POST /v1/runs                  {task_id | task, setup, provider?, evaluator?, script?} -> 202 {run_id}
///   GET  /v1/runs                  run summaries
///   GET  /v1/runs/{id}             summary plus rounds
///   GET  /v1/runs/{id}/events?from=N   NDJSON stream; stays open until the run is terminal
///   POST /v1/runs/{id}/feedback    {solved, feedback} -> 204; 409 unless paused; 422 if invalid
///   GET  /v1/tasks                 configured tasks
///
/// Error bodies are {"code", "message", "details"}.
class Gateway {
public:
    Gateway(HarnessConfig config, GatewayOptions options = {});
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Bind and serve on a background thread. Returns the bound port.
    int start();
    /// Bind and serve on the calling thread until stop().
    void serve();
    /// Stop accepting requests, close streams, and wait for in-flight runs.
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace agentkernel
