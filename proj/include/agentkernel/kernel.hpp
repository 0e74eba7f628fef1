#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentkernel/environment.hpp"
#include "agentkernel/evaluation.hpp"
#include "agentkernel/events.hpp"
#include "agentkernel/prompts.hpp"
#include "agentkernel/recruitment.hpp"

namespace agentkernel {

inline constexpr const char* cot_agent = "Assistant";

/// How a round's result is judged.
struct EvaluationSetup {
    /// Template for agent evaluation ("evaluator", or "evaluator_comparative" for judge-style
    /// comparison against gold.reference).
    std::string template_id = "evaluator";
    /// Programmatic checker; derived from the task kind when unset.
    std::optional<Checker> checker;
    GoldData gold;
    /// Human verdict source. Null with evaluator_kind=human pauses the run.
    FeedbackSource* human = nullptr;
};

struct RunDependencies {
    LlmClient llm;
    PromptLibrary prompts = PromptLibrary::builtin();
    EvaluationSetup evaluation;
    /// Fixed group used instead of recruitment in every round.
    std::optional<RecruitmentOutcome> manual_group;
    /// Receives each event after it has been applied to the record.
    std::function<void(const StageEvent&)> sink;
    /// Wall clock for event timestamps.
    std::function<std::string()> clock = utc_now;
};

/// One pipeline run: the record plus the live environment it acts on.
///
/// A run is strictly sequential. `start` and `resume` run rounds until the run is solved,
/// unsolved, aborted, or waiting for a human verdict.
class Run {
public:
    /// Throws ConfigError when the configuration is invalid or the environment does not serve
    /// the goal's task kind.
    Run(std::string run_id, RunConfig config, Goal goal, std::unique_ptr<Environment> env, RunDependencies deps);
    Run(const Run&) = delete;
    Run& operator=(const Run&) = delete;

    const RunRecord& start();
    /// Inject a human verdict into a paused run and continue. StateConflictError when the run is
    /// not awaiting a human verdict; ValidationError when the verdict is invalid.
    const RunRecord& resume(const Verdict& verdict);

    const RunRecord& record() const { return record_; }
    const Environment& environment() const { return *env_; }

private:
    void emit(int round, Stage stage, std::optional<std::string> agent, const std::string& kind, json payload);
    void run_rounds(int first_round, std::optional<std::string> feedback);
    /// Returns true when the run ends after applying `verdict` in `round`.
    bool finish_round(int round, const Verdict& verdict, const std::string& source);
    void run_cot();
    void abort(int round, Stage stage, const std::exception& error);

    RunConfig config_;
    Goal goal_;
    std::unique_ptr<Environment> env_;
    RunDependencies deps_;
    LlmClient observed_llm_;
    RunRecord record_;
    int current_round_ = 0;
    Stage current_stage_ = Stage::recruit;
    bool started_ = false;
};

/// Build and run a pipeline to completion or pause.
RunRecord run_pipeline(const std::string& run_id, const RunConfig& config, const Goal& goal,
                       std::unique_ptr<Environment> env, RunDependencies deps);

/// Continue a paused run with a human verdict.
const RunRecord& resume_run(Run& run, const Verdict& verdict);

/// Context the decision stage reasons over: the goal and the current observation.
std::string decision_context(const Goal& goal, const Environment& env);

} // namespace agentkernel
