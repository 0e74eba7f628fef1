#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentkernel/crafting.hpp"
#include "agentkernel/prompts.hpp"
#include "agentkernel/react.hpp"
#include "agentkernel/sandbox.hpp"
#include "agentkernel/tools.hpp"
#include "agentkernel/types.hpp"

namespace agentkernel {

enum class EnvKind { answer, code, tool, crafting };
NLOHMANN_JSON_SERIALIZE_ENUM(EnvKind, {{EnvKind::answer, "answer"},
                                       {EnvKind::code, "code"},
                                       {EnvKind::tool, "tool"},
                                       {EnvKind::crafting, "crafting"}})

std::string to_string(EnvKind kind);

/// Environment kind that serves a task kind.
EnvKind env_kind_for(TaskKind kind);
bool env_matches(TaskKind task, EnvKind env);
/// Tool and crafting environments execute per-agent assignments rather than a single answer.
bool needs_assignments(EnvKind kind);

struct ExecutionReport {
    EnvKind kind = EnvKind::answer;
    /// Every executor step succeeded (tests passed, sub-goals completed, ...).
    bool ok = true;
    std::string summary;
    /// Kind-specific details: TestReport, per-agent results, ReAct traces.
    json details = json::object();
};

void to_json(json& j, const ExecutionReport& r);
void from_json(const json& j, ExecutionReport& r);

/// What an executor may use besides the decision itself.
struct ExecutionContext {
    const std::vector<ExpertProfile>& agents;
    const LlmClient& llm;
    const PromptLibrary& prompts;
    std::string goal;
};

/// State s plus transition T. `transition` is the only mutator; `observation` and `state` are
/// pure renderings.
class Environment {
public:
    virtual ~Environment() = default;
    virtual EnvKind kind() const = 0;
    /// Text shown to agents and to the evaluator.
    virtual std::string observation() const = 0;
    virtual json state() const = 0;
    virtual ExecutionReport transition(const GroupDecision& decision, const ExecutionContext& ctx) = 0;
    virtual std::unique_ptr<Environment> clone() const = 0;
};

/// The decision text becomes the candidate answer. With concepts configured, coverage is part
/// of the state so agents and evaluators can see what is missing.
class AnswerEnvironment : public Environment {
public:
    explicit AnswerEnvironment(std::vector<std::string> concepts = {});

    EnvKind kind() const override { return EnvKind::answer; }
    std::string observation() const override;
    json state() const override;
    ExecutionReport transition(const GroupDecision& decision, const ExecutionContext& ctx) override;
    std::unique_ptr<Environment> clone() const override;

    const std::optional<std::string>& answer() const { return answer_; }

private:
    std::vector<std::string> concepts_;
    std::optional<std::string> answer_;
};

/// The first fenced code block of the decision is run against the task's unit tests.
/// With `agent_tests`, a "Tester" agent additionally writes tests whose results are shown
/// alongside.
class CodeEnvironment : public Environment {
public:
    CodeEnvironment(std::string tests, SandboxLimits limits = {}, bool agent_tests = false);

    EnvKind kind() const override { return EnvKind::code; }
    std::string observation() const override;
    json state() const override;
    ExecutionReport transition(const GroupDecision& decision, const ExecutionContext& ctx) override;
    std::unique_ptr<Environment> clone() const override;

private:
    std::string tests_;
    SandboxLimits limits_;
    bool agent_tests_;
    std::optional<std::string> code_;
    std::optional<TestReport> report_;
    std::optional<TestReport> agent_report_;
    std::string error_;
};

inline constexpr const char* tester_agent = "Tester";

/// Each assigned agent works its sub-task in a ReAct loop over the tool registry.
class ToolEnvironment : public Environment {
public:
    ToolEnvironment(ToolRegistry tools, int max_steps = default_react_steps);

    EnvKind kind() const override { return EnvKind::tool; }
    std::string observation() const override;
    json state() const override;
    ExecutionReport transition(const GroupDecision& decision, const ExecutionContext& ctx) override;
    std::unique_ptr<Environment> clone() const override;

    const ToolRegistry& tools() const { return tools_; }

private:
    ToolRegistry tools_;
    int max_steps_;
    std::vector<std::pair<std::string, Conclusion>> conclusions_;
};

/// Assignments are executed in the gridworld by the built-in planner.
class CraftingEnvironment : public Environment {
public:
    explicit CraftingEnvironment(crafting::World world, int attempt_cap = crafting::default_attempt_cap);

    EnvKind kind() const override { return EnvKind::crafting; }
    std::string observation() const override;
    json state() const override;
    ExecutionReport transition(const GroupDecision& decision, const ExecutionContext& ctx) override;
    std::unique_ptr<Environment> clone() const override;

    const crafting::World& world() const { return world_; }
    /// Called after every primitive action; used by conservation checks.
    void set_action_observer(crafting::ActionObserver observer) { observer_ = std::move(observer); }

private:
    crafting::World world_;
    int attempt_cap_;
    std::vector<crafting::AgentResult> last_results_;
    crafting::ActionObserver observer_;
};

/// Checks that `env` serves `task` (ConfigError otherwise) and applies the decision.
ExecutionReport execute(const GroupDecision& decision, Environment& env, TaskKind task,
                        const ExecutionContext& ctx);

} // namespace agentkernel
