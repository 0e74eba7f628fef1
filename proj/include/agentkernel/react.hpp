#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agentkernel/prompts.hpp"
#include "agentkernel/tools.hpp"
#include "agentkernel/types.hpp"

namespace agentkernel {

/// Iteration cap for tool-using agents.
inline constexpr int default_react_steps = 10;

struct ToolCall {
    std::string tool;
    json arguments;
    int step = 0;
    /// Set when the call arrived through structured function calling.
    std::optional<std::string> call_id;
};

struct ReactStep {
    int step = 0;
    std::string thought;
    std::optional<ToolCall> call;
    std::string observation;
    bool malformed = false;
};

struct ReactResult {
    Conclusion conclusion;
    std::vector<ReactStep> steps;
};

void to_json(json& j, const ToolCall& c);
void to_json(json& j, const ReactStep& s);
void to_json(json& j, const ReactResult& r);

/// One parsed agent reply in the tool loop.
struct ReactReply {
    enum class Kind { action, conclusion, malformed } kind = Kind::malformed;
    std::string thought;
    std::optional<ToolCall> call;
    ConclusionStatus status = ConclusionStatus::pending;
    std::string summary;
    std::string error;
};

/// Structured `tool_calls` take precedence; otherwise the text protocol
/// (Thought / Action / Action Input, or Thought / Conclusion / Summary) is parsed.
ReactReply parse_react_reply(const ChatMessage& reply);

/// Thought -> tool call -> observation loop. Ends when the agent concludes; on step `max_steps`
/// the agent is told to conclude and, failing that, a pending conclusion is forced. Calls to
/// unknown tools come back as error observations. Two malformed replies in a row force a
/// pending conclusion.
ReactResult react_loop(const ExpertProfile& agent, const ToolRegistry& tools, const std::string& task,
                       int max_steps, const LlmClient& llm, const PromptLibrary& prompts);

} // namespace agentkernel
