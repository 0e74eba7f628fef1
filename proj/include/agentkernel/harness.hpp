#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentkernel/evaluation.hpp"
#include "agentkernel/events.hpp"
#include "agentkernel/kernel.hpp"
#include "agentkernel/providers.hpp"
#include "agentkernel/sandbox.hpp"

namespace agentkernel {

/// A benchmark task: goal, gold data, environment options, and per-setup overrides.
///
/// JSON form:
///   {"id", "kind", "goal", "gold": {...}, "environment": {...}, "evaluator", "checker",
///    "evaluator_template", "manual_group": [{"name", "description"}], "overrides": {"group": {...}}}
/// `environment` keys: world (fixture path), corpus (directory), attempt_cap, max_steps, agent_tests.
struct TaskSpec {
    std::string id;
    std::string suite;
    Goal goal;
    GoldData gold;
    json environment = json::object();
    std::optional<EvaluatorKind> evaluator;
    std::optional<Checker> checker;
    std::optional<std::string> evaluator_template;
    std::optional<std::vector<ExpertProfile>> manual_group;
    /// RunConfig fields keyed by setup name, or "all".
    json overrides = json::object();

    /// Throws ValidationError naming the offending field (e.g. "gold.answer").
    void validate() const;
};

TaskSpec task_from_json(const json& j, const std::string& suite = {});
void to_json(json& j, const TaskSpec& t);

struct ProviderConfig {
    std::string name;
    /// "scripted" or "openai".
    std::string type = "scripted";
    /// Scripted: path of the script file, absolute or relative to the config file.
    std::filesystem::path script;
    OpenAIConfig openai;
    ClientOptions options;
};

/// Parsed configuration file.
///
///   {"providers": {"<name>": {"type": "scripted", "script": "..."} |
///                            {"type": "openai", "base_url", "model", "temperature", "max_tokens",
///                             "max_retries", "base_delay_ms", "timeout_s", "function_calling"}},
///    "default_provider": "<name>",
///    "defaults": {"run": {RunConfig fields}, "kinds": {"<task kind>": {RunConfig fields}}},
///    "sandbox": {"wall_clock_ms", "memory_mb", "python"},
///    "suites": ["<suite file>", ...], "tasks": [TaskSpec, ...],
///    "prompts_dir": "<dir>", "store_dir": "<dir>", "corpus": "<dir>", "parallelism": 1}
/// Relative paths resolve against the config file's directory.
struct HarnessConfig {
    std::filesystem::path base_dir = ".";
    std::map<std::string, ProviderConfig> providers;
    std::string default_provider;
    json defaults = json::object();
    SandboxLimits sandbox;
    std::map<std::string, std::vector<std::string>> suites;
    std::map<std::string, TaskSpec> tasks;
    std::optional<std::filesystem::path> prompts_dir;
    std::filesystem::path store_dir = "runs";
    std::filesystem::path corpus_dir = "corpus";
    int parallelism = 1;

    static HarnessConfig load(const std::filesystem::path& file);
    static HarnessConfig from_json(const json& j, const std::filesystem::path& base_dir);

    const TaskSpec& task(const std::string& id) const;
    std::vector<const TaskSpec*> suite(const std::string& name) const;
    const ProviderConfig& provider(const std::string& name) const;
    PromptLibrary prompts() const;
    std::filesystem::path resolve(const std::filesystem::path& p) const;
    /// Check every task, provider, and suite reference. Returns problems; empty means valid.
    std::vector<std::string> check() const;
};

/// Per-kind defaults: two vertical agents for math, four vertical agents for qa, code, and
/// constrained generation, three horizontal agents for tool use and crafting.
RunConfig default_run_config(TaskKind kind);
EvaluatorKind default_evaluator(TaskKind kind);

/// Defaults, then config, then task overrides, then the setup's own constraints
/// (cot: one agent, one round; solo: one agent).
RunConfig resolve_run_config(const HarnessConfig& config, const TaskSpec& task, Setup setup);

std::unique_ptr<Environment> make_environment(const TaskSpec& task, const HarnessConfig& config);

/// Scripted providers are built fresh per (task, setup) so results do not depend on task order.
/// A script file is either a flat entry list or {"tasks": {"<id>": {"<setup>" | "*": entries}}}.
std::shared_ptr<Provider> make_provider(const ProviderConfig& provider, const std::string& task_id, Setup setup);

struct RunRequest {
    std::string run_id;
    Setup setup = Setup::group;
    std::string provider;
    std::optional<EvaluatorKind> evaluator;
    FeedbackSource* human = nullptr;
    std::function<void(const StageEvent&)> sink;
    /// Replaces the provider with a scripted one over these entries.
    std::optional<json> script;
};

/// A constructed but not yet started run.
std::unique_ptr<Run> prepare_run(const HarnessConfig& config, const TaskSpec& task, const RunRequest& request);

struct TaskOutcome {
    std::string task_id;
    std::string run_id;
    RunStatus status = RunStatus::aborted;
    int rounds = 0;
    /// Metric value for this task in [0, 1].
    double score = 0.0;
    std::string error;
};

void to_json(json& j, const TaskOutcome& o);
void from_json(const json& j, TaskOutcome& o);

/// "accuracy" (math, tool), "pass_rate" (code), "coverage" (constrained generation),
/// "success" (crafting), "judged" (qa).
std::string metric_name(TaskKind kind);

/// Score a finished run from its final environment state, independently of the evaluator.
double score_run(const TaskSpec& task, const RunRecord& record);

struct SuiteResult {
    std::string suite;
    Setup setup = Setup::group;
    std::string metric;
    /// Sorted by task id.
    std::vector<TaskOutcome> outcomes;
    double aggregate = 0.0;
};

void to_json(json& j, const SuiteResult& r);
void from_json(const json& j, SuiteResult& r);

/// Mean score over outcomes (0 for an empty list).
double aggregate_score(const std::vector<TaskOutcome>& outcomes);

/// Run every task of a suite under one setup. Aborted tasks score 0 and do not stop the suite.
/// Transcripts go to `store` when given.
SuiteResult run_benchmark(const HarnessConfig& config, const std::string& suite, Setup setup,
                          const std::string& provider, TranscriptStore* store = nullptr);

/// Tasks by setups grid.
struct Comparison {
    std::string suite;
    std::string metric;
    std::vector<std::string> setups;
    std::vector<std::string> tasks;
    /// cells[task][setup]
    std::vector<std::vector<double>> cells;
    std::vector<double> aggregates;

    json to_json() const;
    std::string to_text() const;
};

/// ValidationError for an empty list or results from different suites or task sets.
Comparison compare_setups(const std::vector<SuiteResult>& results);

/// Rebuild a record from its persisted transcript.
RunRecord replay(const TranscriptStore& store, const std::string& run_id);

} // namespace agentkernel
