#include "agentkernel/kernel.hpp"

#include "agentkernel/decision.hpp"
#include "agentkernel/error.hpp"

namespace agentkernel {

namespace {

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const ScriptExhaustedError*>(&e)) return "script_exhausted";
    if (dynamic_cast<const RetryExhaustedError*>(&e)) return "retry_exhausted";
    if (dynamic_cast<const ProviderError*>(&e)) return "provider_error";
    if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
    if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
    if (dynamic_cast<const ValidationError*>(&e)) return "validation_error";
    if (dynamic_cast<const SandboxError*>(&e)) return "sandbox_error";
    return "error";
}

} // namespace

std::string decision_context(const Goal& goal, const Environment& env) {
    return "Goal:\n" + goal.text + "\n\nCurrent state:\n" + env.observation();
}

Run::Run(std::string run_id, RunConfig config, Goal goal, std::unique_ptr<Environment> env, RunDependencies deps)
    : config_(std::move(config)), goal_(std::move(goal)), env_(std::move(env)), deps_(std::move(deps)),
      observed_llm_(deps_.llm) {
    config_.validate();
    goal_.validate();
    if (run_id.empty()) throw ConfigError("run id must not be empty");
    if (!env_) throw ConfigError("run needs an environment");
    if (!env_matches(goal_.task_kind, env_->kind())) {
        throw ConfigError("environment kind " + to_string(env_->kind()) + " does not serve task kind " +
                          to_string(goal_.task_kind));
    }
    if (config_.setup == Setup::cot && needs_assignments(env_->kind())) {
        throw ConfigError("the cot setup has no executor for " + to_string(env_->kind()) + " environments");
    }
    if (config_.setup != Setup::cot && config_.evaluator_kind == EvaluatorKind::programmatic) {
        require_gold(deps_.evaluation.checker.value_or(checker_for(goal_.task_kind)), deps_.evaluation.gold);
    }
    if (deps_.manual_group && deps_.manual_group->profiles.empty()) throw ConfigError("manual group is empty");
    record_.run_id = std::move(run_id);
    record_.goal = goal_;
    record_.config = config_;

    observed_llm_ = deps_.llm.with_observer([this](const CompletionRequest& request, const ChatMessage& reply) {
        emit(current_round_, current_stage_, request.agent, event_kind::llm_call,
             json{{"agent", request.agent}, {"messages", request.messages}, {"response", reply}});
    });
}

void Run::emit(int round, Stage stage, std::optional<std::string> agent, const std::string& kind, json payload) {
    StageEvent e;
    e.seq = static_cast<long long>(record_.events.size());
    e.round = round;
    e.stage = stage;
    e.agent = std::move(agent);
    e.kind = kind;
    e.payload = std::move(payload);
    e.timestamp = deps_.clock ? deps_.clock() : std::string{};
    apply_event(record_, e);
    if (deps_.sink) deps_.sink(record_.events.back());
}

const RunRecord& Run::start() {
    if (started_) throw StateConflictError("run " + record_.run_id + " has already started");
    started_ = true;
    emit(0, Stage::recruit, std::nullopt, event_kind::run_started,
         json{{"run_id", record_.run_id}, {"goal", goal_}, {"config", config_}});
    if (config_.setup == Setup::cot) {
        run_cot();
    } else {
        run_rounds(0, std::nullopt);
    }
    return record_;
}

const RunRecord& Run::resume(const Verdict& verdict) {
    if (record_.status != RunStatus::awaiting_human) {
        throw StateConflictError("run " + record_.run_id + " is " + to_string(record_.status) +
                                 ", not awaiting_human");
    }
    verdict.validate();
    current_stage_ = Stage::evaluate;
    if (!finish_round(current_round_, verdict, "human")) run_rounds(current_round_ + 1, verdict.feedback);
    return record_;
}

void Run::abort(int round, Stage stage, const std::exception& error) {
    emit(round, stage, std::nullopt, event_kind::aborted,
         json{{"cause", error_kind(error) + ": " + error.what()}, {"error", error_kind(error)}});
}

void Run::run_rounds(int first_round, std::optional<std::string> feedback) {
    for (int round = first_round; round < config_.max_rounds; ++round) {
        current_round_ = round;
        current_stage_ = Stage::recruit;
        try {
            emit(round, Stage::recruit, std::nullopt, event_kind::round_started,
                 json{{"feedback", feedback ? json(*feedback) : json(nullptr)}});

            RecruitmentOutcome group;
            if (deps_.manual_group) {
                group = *deps_.manual_group;
                if (config_.setup == Setup::solo) group.profiles.resize(1);
                emit(round, Stage::recruit, std::nullopt, event_kind::experts, group);
            } else {
                group = recruit(goal_, feedback, config_.n_experts, observed_llm_, deps_.prompts);
                emit(round, Stage::recruit, recruiter_agent, event_kind::experts, group);
            }

            current_stage_ = Stage::decide;
            const std::string context = decision_context(goal_, *env_);
            const bool assign = needs_assignments(env_->kind());
            const auto& profiles = group.profiles;
            DecisionOutcome outcome;
            if (config_.setup == Setup::solo || profiles.size() == 1) {
                outcome = decide_solo(profiles.front(), context, observed_llm_, deps_.prompts);
                if (assign) outcome.decision.assignments = {{profiles.front().name, outcome.decision.decision_text}};
            } else if (config_.structure == Structure::vertical) {
                std::vector<ExpertProfile> reviewers(profiles.begin() + 1, profiles.end());
                outcome = decide_vertical(profiles.front(), reviewers, context, config_.k_max, observed_llm_,
                                          deps_.prompts);
                if (assign) outcome.decision.assignments = {{profiles.front().name, outcome.decision.decision_text}};
            } else {
                int turns = config_.discussion_turn_cap(static_cast<int>(profiles.size()));
                outcome = decide_horizontal(profiles, context, turns, assign, observed_llm_, deps_.prompts);
            }
            emit(round, Stage::decide, std::nullopt, event_kind::decision, outcome);

            current_stage_ = Stage::execute;
            ExecutionContext ctx{profiles, observed_llm_, deps_.prompts, goal_.text};
            ExecutionReport report = execute(outcome.decision, *env_, goal_.task_kind, ctx);
            emit(round, Stage::execute, std::nullopt, event_kind::execution_report,
                 json{{"report", report}, {"state", env_->state()}});

            current_stage_ = Stage::evaluate;
            const std::string rendering = env_->observation();
            std::optional<Verdict> verdict;
            std::string source = to_string(config_.evaluator_kind);
            switch (config_.evaluator_kind) {
            case EvaluatorKind::agent:
                verdict = evaluate_agent(rendering, goal_, observed_llm_, deps_.prompts,
                                         deps_.evaluation.template_id, deps_.evaluation.gold.reference);
                break;
            case EvaluatorKind::programmatic:
                verdict = evaluate_programmatic(env_->state(), goal_,
                                                deps_.evaluation.checker.value_or(checker_for(goal_.task_kind)),
                                                deps_.evaluation.gold);
                break;
            case EvaluatorKind::human:
                verdict = evaluate_human(rendering, goal_, deps_.evaluation.human);
                break;
            }
            if (!verdict) {
                emit(round, Stage::evaluate, std::nullopt, event_kind::awaiting_human,
                     json{{"state_rendering", rendering}});
                return;
            }
            if (finish_round(round, *verdict, source)) return;
            feedback = verdict->feedback;
        } catch (const std::exception& e) {
            abort(round, current_stage_, e);
            return;
        }
    }
}

bool Run::finish_round(int round, const Verdict& verdict, const std::string& source) {
    emit(round, Stage::evaluate, std::nullopt, event_kind::verdict, json{{"verdict", verdict}, {"source", source}});
    if (verdict.solved) {
        emit(round, Stage::evaluate, std::nullopt, event_kind::run_finished, json{{"status", RunStatus::solved}});
        return true;
    }
    if (round + 1 >= config_.max_rounds) {
        emit(round, Stage::evaluate, std::nullopt, event_kind::run_finished, json{{"status", RunStatus::unsolved}});
        return true;
    }
    return false;
}

void Run::run_cot() {
    current_round_ = 0;
    current_stage_ = Stage::recruit;
    try {
        emit(0, Stage::recruit, std::nullopt, event_kind::round_started, json{{"feedback", nullptr}});
        current_stage_ = Stage::decide;
        ChatMessage reply = observed_llm_.ask(cot_agent, render_prompt(deps_.prompts, "cot", {{"goal", goal_.text}}));
        DecisionOutcome outcome;
        outcome.decision.decision_text = reply.content;
        outcome.discussion.turns = {Turn{cot_agent, reply.content}};
        emit(0, Stage::decide, std::nullopt, event_kind::decision, outcome);

        current_stage_ = Stage::execute;
        std::vector<ExpertProfile> agents{ExpertProfile{cot_agent, "single-prompt baseline", 0}};
        ExecutionContext ctx{agents, observed_llm_, deps_.prompts, goal_.text};
        ExecutionReport report = execute(outcome.decision, *env_, goal_.task_kind, ctx);
        emit(0, Stage::execute, std::nullopt, event_kind::execution_report,
             json{{"report", report}, {"state", env_->state()}});
        emit(0, Stage::execute, std::nullopt, event_kind::run_finished,
             json{{"status", RunStatus::unsolved}, {"note", "cot runs are not evaluated"}});
    } catch (const std::exception& e) {
        abort(0, current_stage_, e);
    }
}

RunRecord run_pipeline(const std::string& run_id, const RunConfig& config, const Goal& goal,
                       std::unique_ptr<Environment> env, RunDependencies deps) {
    Run run(run_id, config, goal, std::move(env), std::move(deps));
    return run.start();
}

const RunRecord& resume_run(Run& run, const Verdict& verdict) { return run.resume(verdict); }

} // namespace agentkernel
