#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentkernel {

using json = nlohmann::json;

enum class TaskKind { qa, constrained_generation, math, code, tool, crafting };
enum class Setup { cot, solo, group };
enum class Structure { horizontal, vertical };
enum class EvaluatorKind { agent, human, programmatic };

NLOHMANN_JSON_SERIALIZE_ENUM(TaskKind, {{TaskKind::qa, "qa"},
                                        {TaskKind::constrained_generation, "constrained_generation"},
                                        {TaskKind::math, "math"},
                                        {TaskKind::code, "code"},
                                        {TaskKind::tool, "tool"},
                                        {TaskKind::crafting, "crafting"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Setup, {{Setup::cot, "cot"}, {Setup::solo, "solo"}, {Setup::group, "group"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Structure, {{Structure::horizontal, "horizontal"},
                                         {Structure::vertical, "vertical"}})
NLOHMANN_JSON_SERIALIZE_ENUM(EvaluatorKind, {{EvaluatorKind::agent, "agent"},
                                             {EvaluatorKind::human, "human"},
                                             {EvaluatorKind::programmatic, "programmatic"}})

/// Parse an enum from its wire name; throws ConfigError naming `what` on an unknown value.
template <typename Enum>
Enum parse_enum(const std::string& text, const char* what);

std::string to_string(TaskKind kind);
std::string to_string(Setup setup);
std::string to_string(Structure structure);
std::string to_string(EvaluatorKind kind);

struct Goal {
    std::string text;
    TaskKind task_kind = TaskKind::qa;

    void validate() const;
};

void to_json(json& j, const Goal& goal);
void from_json(const json& j, Goal& goal);

/// Knobs for one pipeline run.
struct RunConfig {
    Setup setup = Setup::group;
    int n_experts = 4;
    Structure structure = Structure::vertical;
    int max_rounds = 3;
    int k_max = 3;
    /// Unset means two full cycles (2 x group size).
    std::optional<int> max_discussion_turns;
    std::string provider_ref = "default";
    EvaluatorKind evaluator_kind = EvaluatorKind::agent;

    /// Throws ConfigError when an invariant does not hold.
    void validate() const;
    int discussion_turn_cap(int group_size) const;
};

void to_json(json& j, const RunConfig& config);
void from_json(const json& j, RunConfig& config);

struct ExpertProfile {
    std::string name;
    std::string description;
    int index = 0;

    bool operator==(const ExpertProfile&) const = default;
};

void to_json(json& j, const ExpertProfile& profile);
void from_json(const json& j, ExpertProfile& profile);

struct Review {
    std::string reviewer;
    bool approved = false;
    std::string critique;

    bool operator==(const Review&) const = default;
};

void to_json(json& j, const Review& review);
void from_json(const json& j, Review& review);

enum class Termination { consensus, turn_cap, refinement_cap };
NLOHMANN_JSON_SERIALIZE_ENUM(Termination, {{Termination::consensus, "consensus"},
                                           {Termination::turn_cap, "turn_cap"},
                                           {Termination::refinement_cap, "refinement_cap"}})

struct Turn {
    std::string agent;
    std::string text;

    bool operator==(const Turn&) const = default;
};

void to_json(json& j, const Turn& turn);
void from_json(const json& j, Turn& turn);

struct Discussion {
    std::vector<Turn> turns;
    Structure structure = Structure::vertical;
    Termination terminated_by = Termination::consensus;

    bool operator==(const Discussion&) const = default;
};

void to_json(json& j, const Discussion& discussion);
void from_json(const json& j, Discussion& discussion);

/// The collective decision of a group plus per-agent sub-task assignments.
struct GroupDecision {
    std::string decision_text;
    std::map<std::string, std::string> assignments;
    int refinements = 0;

    bool operator==(const GroupDecision&) const = default;
};

void to_json(json& j, const GroupDecision& decision);
void from_json(const json& j, GroupDecision& decision);

struct Verdict {
    bool solved = false;
    std::optional<double> score;
    std::string feedback;

    static Verdict accept(std::string feedback = {}, std::optional<double> score = std::nullopt);
    /// Throws ValidationError when `feedback` is blank.
    static Verdict reject(std::string feedback, std::optional<double> score = std::nullopt);

    void validate() const;

    bool operator==(const Verdict&) const = default;
};

void to_json(json& j, const Verdict& verdict);
void from_json(const json& j, Verdict& verdict);

struct TestFailure {
    std::string name;
    std::string message;

    bool operator==(const TestFailure&) const = default;
};

struct TestReport {
    int total = 0;
    int passed = 0;
    std::vector<TestFailure> failures;

    bool all_passed() const { return passed == total && failures.empty(); }
    double pass_rate() const { return total == 0 ? 1.0 : static_cast<double>(passed) / total; }

    bool operator==(const TestReport&) const = default;
};

void to_json(json& j, const TestFailure& failure);
void from_json(const json& j, TestFailure& failure);
void to_json(json& j, const TestReport& report);
void from_json(const json& j, TestReport& report);

enum class ConclusionStatus { pending, finished };
NLOHMANN_JSON_SERIALIZE_ENUM(ConclusionStatus, {{ConclusionStatus::pending, "pending"},
                                                {ConclusionStatus::finished, "finished"}})

struct Conclusion {
    ConclusionStatus status = ConclusionStatus::pending;
    std::string summary;
    int steps_used = 0;
    bool forced = false;

    bool operator==(const Conclusion&) const = default;
};

void to_json(json& j, const Conclusion& conclusion);
void from_json(const json& j, Conclusion& conclusion);

} // namespace agentkernel
