// Command-line front end: run, bench, replay, serve, validate.

#include <csignal>
#include <pthread.h>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "agentkernel/error.hpp"
#include "agentkernel/gateway.hpp"
#include "agentkernel/harness.hpp"

using namespace agentkernel;

namespace {

std::string default_config_path() { return std::string(AGENTKERNEL_ASSET_DIR) + "/config/default.json"; }

void write_json(const std::filesystem::path& path, const json& j) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void print_record(const RunRecord& r) {
    std::cout << "run " << r.run_id << ": " << to_string(r.status) << " after " << r.rounds.size() << " round(s)\n";
    for (const auto& round : r.rounds) {
        std::cout << "  round " << round.index;
        if (round.recruitment) {
            std::cout << ", experts:";
            for (const auto& p : round.recruitment->profiles) std::cout << " " << p.name;
        }
        if (round.verdict) {
            std::cout << ", verdict: " << (round.verdict->solved ? "solved" : "unsolved");
            if (!round.verdict->feedback.empty()) std::cout << " (" << round.verdict->feedback << ")";
        }
        std::cout << "\n";
    }
    if (r.abort_cause) std::cout << "  aborted: " << *r.abort_cause << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent recruit / decide / execute / evaluate engine"};
    app.require_subcommand(1);

    std::string config_path = default_config_path();
    std::string provider;
    std::string out_dir = "out";
    app.add_option("--config", config_path, "Configuration file")->capture_default_str();
    app.add_option("--provider", provider, "Provider name from the configuration");
    app.add_option("--out", out_dir, "Directory for transcripts and results")->capture_default_str();

    auto* run_cmd = app.add_subcommand("run", "Run one task");
    std::string task_id, setup_name = "group", evaluator_name, run_id;
    run_cmd->add_option("task", task_id, "Task id")->required();
    run_cmd->add_option("--setup", setup_name, "cot, solo, or group")->capture_default_str();
    run_cmd->add_option("--evaluator", evaluator_name, "Override the evaluator: agent, programmatic, human");
    run_cmd->add_option("--run-id", run_id, "Run id (default: <task>-<setup>)");

    auto* bench_cmd = app.add_subcommand("bench", "Run a suite under one or more setups");
    std::string suite;
    std::vector<std::string> setups{"cot", "solo", "group"};
    bench_cmd->add_option("suite", suite, "Suite name")->required();
    bench_cmd->add_option("--setup", setups, "Setups to compare")->capture_default_str();

    auto* replay_cmd = app.add_subcommand("replay", "Rebuild a run record from its transcript");
    std::string replay_id;
    bool replay_full = false;
    replay_cmd->add_option("run_id", replay_id, "Run id")->required();
    replay_cmd->add_flag("--json", replay_full, "Print the full record as JSON");

    auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP gateway");
    GatewayOptions gw;
    std::string static_dir;
    serve_cmd->add_option("--host", gw.host, "Bind address (loopback by default)")->capture_default_str();
    serve_cmd->add_option("--port", gw.port, "Port (0 picks a free one)")->capture_default_str();
    serve_cmd->add_option("--static", static_dir, "Directory of console assets to serve at /");

    app.add_subcommand("validate", "Check the configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        HarnessConfig config = HarnessConfig::load(config_path);
        const std::filesystem::path out(out_dir);

        if (app.got_subcommand("validate")) {
            auto problems = config.check();
            for (const auto& p : problems) std::cerr << "error: " << p << "\n";
            if (!problems.empty()) return 1;
            std::cout << "ok: " << config.tasks.size() << " tasks, " << config.suites.size() << " suites, "
                      << config.providers.size() << " providers\n";
            return 0;
        }

        if (app.got_subcommand("run")) {
            TranscriptStore store(out / "runs");
            const TaskSpec& task = config.task(task_id);
            RunRequest request;
            request.setup = parse_enum<Setup>(setup_name, "setup");
            request.run_id = run_id;
            request.provider = provider;
            TerminalFeedbackSource terminal(std::cin, std::cout);
            if (!evaluator_name.empty()) {
                request.evaluator = parse_enum<EvaluatorKind>(evaluator_name, "evaluator kind");
                if (*request.evaluator == EvaluatorKind::human) request.human = &terminal;
            }
            std::string id = run_id.empty() ? task.id + "-" + setup_name : run_id;
            request.sink = [&store, id](const StageEvent& e) { store.append(id, e); };
            auto run = prepare_run(config, task, request);
            const RunRecord& record = run->start();
            print_record(record);
            std::cout << "transcript: " << store.path_for(id).string() << "\n";
            std::cout << "score: " << score_run(task, record) << "\n";
            return record.status == RunStatus::aborted ? 1 : 0;
        }

        if (app.got_subcommand("bench")) {
            TranscriptStore store(out / "runs");
            std::vector<SuiteResult> results;
            for (const auto& s : setups) {
                results.push_back(run_benchmark(config, suite, parse_enum<Setup>(s, "setup"), provider, &store));
                for (const auto& o : results.back().outcomes) {
                    if (!o.error.empty()) std::cerr << s << " " << o.task_id << ": " << o.error << "\n";
                }
            }
            Comparison table = compare_setups(results);
            write_json(out / ("results-" + suite + ".json"),
                       json{{"results", results}, {"comparison", table.to_json()}});
            std::cout << table.to_text();
            return 0;
        }

        if (app.got_subcommand("replay")) {
            TranscriptStore store(out / "runs");
            RunRecord record = replay(store, replay_id);
            if (replay_full) {
                std::cout << json(record).dump(2) << "\n";
            } else {
                print_record(record);
            }
            return 0;
        }

        if (app.got_subcommand("serve")) {
            if (!static_dir.empty()) gw.static_dir = static_dir;
            gw.store_dir = out / "runs";
            // Block the shutdown signals before any thread starts so only sigwait sees them.
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);
            Gateway gateway(config, gw);
            int port = gateway.start();
            std::cout << "listening on http://" << gw.host << ":" << port << std::endl;
            int received = 0;
            sigwait(&signals, &received);
            gateway.stop();
            return 0;
        }
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error at seq " << e.seq() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
