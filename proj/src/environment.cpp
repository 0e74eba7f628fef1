#include "agentkernel/environment.hpp"

#include <algorithm>

#include "agentkernel/concepts.hpp"
#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

std::string to_string(EnvKind kind) { return json(kind).get<std::string>(); }

EnvKind env_kind_for(TaskKind kind) {
    switch (kind) {
    case TaskKind::qa:
    case TaskKind::constrained_generation:
    case TaskKind::math: return EnvKind::answer;
    case TaskKind::code: return EnvKind::code;
    case TaskKind::tool: return EnvKind::tool;
    case TaskKind::crafting: return EnvKind::crafting;
    }
    throw ConfigError("unknown task kind");
}

bool env_matches(TaskKind task, EnvKind env) { return env_kind_for(task) == env; }

bool needs_assignments(EnvKind kind) { return kind == EnvKind::tool || kind == EnvKind::crafting; }

void to_json(json& j, const ExecutionReport& r) {
    j = json{{"kind", r.kind}, {"ok", r.ok}, {"summary", r.summary}, {"details", r.details}};
}

void from_json(const json& j, ExecutionReport& r) {
    j.at("kind").get_to(r.kind);
    r.ok = j.at("ok").get<bool>();
    r.summary = j.at("summary").get<std::string>();
    r.details = j.value("details", json::object());
}

namespace {

std::string report_text(const TestReport& r) {
    std::string out = std::to_string(r.passed) + "/" + std::to_string(r.total) + " tests passed";
    for (const auto& f : r.failures) out += "\n- " + f.name + ": " + f.message;
    return out;
}

} // namespace

// -- answer ---------------------------------------------------------------------------------

AnswerEnvironment::AnswerEnvironment(std::vector<std::string> concepts) : concepts_(std::move(concepts)) {}

std::string AnswerEnvironment::observation() const {
    if (!answer_) return "No answer has been produced yet.";
    std::string out = "Answer:\n" + *answer_;
    if (!concepts_.empty()) {
        Coverage c = concept_coverage(*answer_, concepts_);
        std::vector<std::string> missing(c.missing.begin(), c.missing.end());
        out += "\n\nMissing concepts: " + (missing.empty() ? std::string("none") : text::join(missing, ", "));
    }
    return out;
}

json AnswerEnvironment::state() const {
    json j{{"answer", answer_ ? json(*answer_) : json(nullptr)}};
    if (!concepts_.empty() && answer_) {
        Coverage c = concept_coverage(*answer_, concepts_);
        j["coverage"] = {{"covered", c.covered}, {"missing", c.missing}};
    }
    return j;
}

ExecutionReport AnswerEnvironment::transition(const GroupDecision& decision, const ExecutionContext&) {
    answer_ = decision.decision_text;
    return ExecutionReport{EnvKind::answer, true, "answer recorded", state()};
}

std::unique_ptr<Environment> AnswerEnvironment::clone() const {
    return std::make_unique<AnswerEnvironment>(*this);
}

// -- code -----------------------------------------------------------------------------------

CodeEnvironment::CodeEnvironment(std::string tests, SandboxLimits limits, bool agent_tests)
    : tests_(std::move(tests)), limits_(std::move(limits)), agent_tests_(agent_tests) {}

std::string CodeEnvironment::observation() const {
    if (!code_ && error_.empty()) return "No code has been produced yet.";
    if (!code_) return "Execution error: " + error_;
    std::string out = "Code:\n```python\n" + *code_ + "\n```\n\nUnit tests: " + report_text(*report_);
    if (agent_report_) out += "\n\nTester's tests: " + report_text(*agent_report_);
    return out;
}

json CodeEnvironment::state() const {
    json j{{"code", code_ ? json(*code_) : json(nullptr)},
           {"report", report_ ? json(*report_) : json(nullptr)}};
    if (agent_report_) j["agent_report"] = *agent_report_;
    if (!error_.empty()) j["error"] = error_;
    return j;
}

ExecutionReport CodeEnvironment::transition(const GroupDecision& decision, const ExecutionContext& ctx) {
    code_.reset();
    report_.reset();
    agent_report_.reset();
    error_.clear();

    auto code = extract_code(decision.decision_text);
    if (!code) {
        error_ = "the decision contains no fenced code block";
        return ExecutionReport{EnvKind::code, false, error_, state()};
    }
    code_ = *code;
    report_ = run_unit_tests(*code_, tests_, limits_);
    if (agent_tests_) {
        auto reply = ctx.llm.ask(tester_agent, render_prompt(ctx.prompts, "tester",
                                                             {{"context", ctx.goal}, {"code", *code_}}));
        auto tests = extract_code(reply.content);
        agent_report_ = run_unit_tests(*code_, tests.value_or(""), limits_);
    }
    return ExecutionReport{EnvKind::code, report_->all_passed(), report_text(*report_), state()};
}

std::unique_ptr<Environment> CodeEnvironment::clone() const { return std::make_unique<CodeEnvironment>(*this); }

// -- tool -----------------------------------------------------------------------------------

ToolEnvironment::ToolEnvironment(ToolRegistry tools, int max_steps) : tools_(std::move(tools)), max_steps_(max_steps) {
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
}

std::string ToolEnvironment::observation() const {
    if (conclusions_.empty()) return "No sub-task has been worked on yet.";
    std::string out;
    for (const auto& [agent, c] : conclusions_) {
        out += agent + " (" + json(c.status).get<std::string>() + " after " + std::to_string(c.steps_used) +
               " steps): " + c.summary + "\n";
    }
    return text::trim_right(out);
}

json ToolEnvironment::state() const {
    json conclusions = json::array();
    std::vector<std::string> summaries;
    for (const auto& [agent, c] : conclusions_) {
        conclusions.push_back({{"agent", agent}, {"conclusion", c}});
        summaries.push_back(c.summary);
    }
    return json{{"conclusions", conclusions}, {"answer", text::join(summaries, "\n")}};
}

ExecutionReport ToolEnvironment::transition(const GroupDecision& decision, const ExecutionContext& ctx) {
    conclusions_.clear();
    json traces = json::array();
    bool ok = true;
    for (const auto& agent : ctx.agents) {
        auto it = decision.assignments.find(agent.name);
        if (it == decision.assignments.end() || text::trim(it->second).empty()) continue;
        ReactResult r = react_loop(agent, tools_, it->second, max_steps_, ctx.llm, ctx.prompts);
        ok = ok && r.conclusion.status == ConclusionStatus::finished;
        conclusions_.emplace_back(agent.name, r.conclusion);
        traces.push_back({{"agent", agent.name}, {"task", it->second}, {"result", r}});
    }
    if (conclusions_.empty()) {
        return ExecutionReport{EnvKind::tool, false, "no agent received a sub-task",
                               json{{"traces", traces}, {"state", state()}}};
    }
    return ExecutionReport{EnvKind::tool, ok, observation(), json{{"traces", traces}, {"state", state()}}};
}

std::unique_ptr<Environment> ToolEnvironment::clone() const { return std::make_unique<ToolEnvironment>(*this); }

// -- crafting -------------------------------------------------------------------------------

CraftingEnvironment::CraftingEnvironment(crafting::World world, int attempt_cap)
    : world_(std::move(world)), attempt_cap_(attempt_cap) {
    if (attempt_cap < 1) throw ConfigError("attempt cap must be >= 1");
}

std::string CraftingEnvironment::observation() const {
    std::string out = world_.render();
    if (!last_results_.empty()) {
        out += "\nLast round's sub-tasks:";
        for (const auto& r : last_results_) {
            if (!r.parse_error.empty()) {
                out += "\n- " + r.agent + ": could not parse assignment (" + r.parse_error + ")";
                continue;
            }
            for (const auto& s : r.subgoals) {
                out += "\n- " + r.agent + ": " + s.text + " -> " +
                       (s.completed ? std::string("completed") : "failed (" + s.reason + ")");
            }
        }
    }
    return out;
}

json CraftingEnvironment::state() const {
    return json{{"world", world_.to_json()}, {"results", last_results_}};
}

ExecutionReport CraftingEnvironment::transition(const GroupDecision& decision, const ExecutionContext& ctx) {
    std::vector<std::pair<std::string, std::string>> ordered;
    for (const auto& agent : ctx.agents) {
        auto it = decision.assignments.find(agent.name);
        if (it != decision.assignments.end()) ordered.emplace_back(it->first, it->second);
    }
    for (const auto& [name, task] : decision.assignments) {
        bool listed = std::any_of(ordered.begin(), ordered.end(), [&](const auto& p) { return p.first == name; });
        if (!listed) ordered.emplace_back(name, task);
    }
    int actions = 0;
    auto observer = [&](const crafting::World& w, const crafting::ActionRecord& rec) {
        if (rec.outcome.accepted) ++actions;
        if (observer_) observer_(w, rec);
    };
    last_results_ = crafting::execute_assignments(world_, ordered, attempt_cap_, observer);
    bool ok = std::all_of(last_results_.begin(), last_results_.end(),
                          [](const crafting::AgentResult& r) { return r.completed(); });
    int done = 0, total = 0;
    for (const auto& r : last_results_) {
        for (const auto& s : r.subgoals) {
            ++total;
            done += s.completed ? 1 : 0;
        }
    }
    std::string summary = std::to_string(done) + "/" + std::to_string(total) + " sub-tasks completed, " +
                          std::to_string(actions) + " actions";
    return ExecutionReport{EnvKind::crafting, ok, summary, state()};
}

std::unique_ptr<Environment> CraftingEnvironment::clone() const {
    return std::make_unique<CraftingEnvironment>(*this);
}

ExecutionReport execute(const GroupDecision& decision, Environment& env, TaskKind task,
                        const ExecutionContext& ctx) {
    if (!env_matches(task, env.kind())) {
        throw ConfigError("environment kind " + to_string(env.kind()) + " does not serve task kind " +
                          to_string(task));
    }
    return env.transition(decision, ctx);
}

} // namespace agentkernel
