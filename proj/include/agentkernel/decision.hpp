#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentkernel/prompts.hpp"
#include "agentkernel/types.hpp"

namespace agentkernel {

inline constexpr std::string_view end_token = "[END]";
inline constexpr const char* summarizer_agent = "Summarizer";

struct DecisionOutcome {
    GroupDecision decision;
    Discussion discussion;
    /// Vertical only: the reviews gathered in each review pass.
    std::vector<std::vector<Review>> reviews;
    /// Horizontal only: how many times the summarizer was asked (including a re-ask).
    int summarizer_calls = 0;
};

void to_json(json& j, const DecisionOutcome& o);
void from_json(const json& j, DecisionOutcome& o);

/// True iff every agent has spoken and each agent's latest turn, after stripping trailing
/// whitespace, ends with "[END]".
bool detect_consensus(const std::vector<Turn>& turns, const std::vector<std::string>& agents);

/// First line "APPROVE" or "REJECT" (surrounding whitespace ignored); the rest is the critique.
/// Any other first line yields nullopt.
std::optional<Review> parse_review(const std::string& reviewer, std::string_view response);

/// Parse "Name: task" lines (or "; "-separated segments) for the given agents. Segments that do
/// not start with a known agent name continue the previous agent's task.
std::map<std::string, std::string> parse_assignments(std::string_view text,
                                                     const std::vector<std::string>& agents);

/// One agent decides alone (the Solo setup).
DecisionOutcome decide_solo(const ExpertProfile& solver, const std::string& context,
                            const LlmClient& llm, const PromptLibrary& prompts);

/// Solver proposes, every reviewer critiques, the solver refines until all reviewers approve or
/// `k_max` refinements have been made. The decision is always the solver's latest proposal.
DecisionOutcome decide_vertical(const ExpertProfile& solver,
                                const std::vector<ExpertProfile>& reviewers,
                                const std::string& context, int k_max, const LlmClient& llm,
                                const PromptLibrary& prompts);

/// Agents speak round-robin, each seeing the whole discussion, until consensus or the turn cap;
/// a summarizer then consolidates the discussion. With `require_assignments`, every agent must
/// receive a task (one re-ask, then ParseError naming the uncovered agents).
DecisionOutcome decide_horizontal(const std::vector<ExpertProfile>& agents,
                                  const std::string& context, int max_turns,
                                  bool require_assignments, const LlmClient& llm,
                                  const PromptLibrary& prompts);

std::string render_transcript(const std::vector<Turn>& turns);

} // namespace agentkernel
