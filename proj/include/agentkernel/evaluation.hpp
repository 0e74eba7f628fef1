#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentkernel/prompts.hpp"
#include "agentkernel/types.hpp"

namespace agentkernel {

inline constexpr const char* evaluator_agent = "Evaluator";

struct CraftTarget {
    std::string item;
    int count = 1;

    bool operator==(const CraftTarget&) const = default;
};

/// Reference data a task is scored against. Which field is required depends on the task kind.
struct GoldData {
    std::optional<std::string> answer;
    std::optional<std::string> tests;
    std::optional<std::vector<std::string>> concepts;
    std::optional<CraftTarget> target;
    /// Reference response for comparative judging.
    std::optional<std::string> reference;

    bool operator==(const GoldData&) const = default;
};

void to_json(json& j, const GoldData& g);
void from_json(const json& j, GoldData& g);

enum class Checker { exact_numeric, all_tests_pass, full_coverage, crafting_goal };
NLOHMANN_JSON_SERIALIZE_ENUM(Checker, {{Checker::exact_numeric, "exact_numeric"},
                                       {Checker::all_tests_pass, "all_tests_pass"},
                                       {Checker::full_coverage, "full_coverage"},
                                       {Checker::crafting_goal, "crafting_goal"}})

/// Checker that scores a task kind; ConfigError for kinds without one (qa).
Checker checker_for(TaskKind kind);

/// Name of the gold field a checker reads ("answer", "tests", "concepts", "target").
const char* gold_field(Checker checker);

/// Throws ConfigError naming the missing gold field.
void require_gold(Checker checker, const GoldData& gold);

/// Last signed integer or decimal literal in `text`. Commas between digits are ignored.
std::optional<double> extract_last_number(std::string_view text);

/// First line "SOLVED" or "UNSOLVED" (surrounding whitespace ignored); the rest is feedback.
/// A rejection with no feedback gets a generic note so the verdict stays valid.
std::optional<Verdict> parse_verdict(std::string_view response);

/// Ask the evaluator agent to judge (state, goal). An unparsable reply is re-asked once; a
/// second unparsable reply is a rejection carrying the raw text.
Verdict evaluate_agent(const std::string& state_rendering, const Goal& goal, const LlmClient& llm,
                       const PromptLibrary& prompts, const std::string& template_id = "evaluator",
                       const std::optional<std::string>& reference = std::nullopt);

/// Score the environment state against gold data. Pure function of its inputs.
Verdict evaluate_programmatic(const json& state, const Goal& goal, Checker checker, const GoldData& gold);

/// Supplies human verdicts. Returning nullopt means none is available now and the run pauses.
class FeedbackSource {
public:
    virtual ~FeedbackSource() = default;
    virtual std::optional<Verdict> request(const std::string& state_rendering, const Goal& goal) = 0;
};

/// Prompts on a terminal: "y" accepts, "n" asks for feedback (re-prompting while it is empty).
/// End of input yields nullopt.
class TerminalFeedbackSource : public FeedbackSource {
public:
    TerminalFeedbackSource(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
    std::optional<Verdict> request(const std::string& state_rendering, const Goal& goal) override;

private:
    std::istream& in_;
    std::ostream& out_;
};

/// Human verdict via `source`; nullopt when no source is attached or it has nothing yet.
/// Verdicts violating the Verdict invariants are rejected by the source being asked again.
std::optional<Verdict> evaluate_human(const std::string& state_rendering, const Goal& goal,
                                      FeedbackSource* source);

} // namespace agentkernel
