#include "agentkernel/react.hpp"

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

void to_json(json& j, const ToolCall& c) {
    j = json{{"tool", c.tool}, {"arguments", c.arguments}, {"step", c.step}};
}

void to_json(json& j, const ReactStep& s) {
    j = json{{"step", s.step}, {"thought", s.thought}, {"observation", s.observation}, {"malformed", s.malformed}};
    if (s.call) j["call"] = *s.call;
}

void to_json(json& j, const ReactResult& r) {
    j = json{{"conclusion", r.conclusion}, {"steps", r.steps}};
}

namespace {

// Value of a "Key:" line plus any continuation lines up to the next known key.
std::optional<std::string> field(const std::vector<std::string>& lines, const std::string& key) {
    static const std::vector<std::string> keys{"Thought:", "Action:", "Action Input:", "Conclusion:", "Summary:"};
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = text::trim(lines[i]);
        if (!line.starts_with(key)) continue;
        std::string value = line.substr(key.size());
        for (std::size_t k = i + 1; k < lines.size(); ++k) {
            std::string next = text::trim(lines[k]);
            bool is_key = false;
            for (const auto& other : keys) is_key = is_key || next.starts_with(other);
            if (is_key) break;
            value += "\n" + lines[k];
        }
        return text::trim(value);
    }
    return std::nullopt;
}

std::size_t first_line_starting(const std::vector<std::string>& lines, const std::string& key) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).starts_with(key)) return i;
    }
    return lines.size();
}

ChatMessage user(std::string content) {
    return ChatMessage{Role::user, std::move(content), std::nullopt, json(), std::nullopt};
}

} // namespace

ReactReply parse_react_reply(const ChatMessage& reply) {
    ReactReply out;
    auto lines = text::split_lines(reply.content);
    out.thought = field(lines, "Thought:").value_or(text::trim(reply.content));

    if (reply.tool_calls.is_array() && !reply.tool_calls.empty()) {
        const json& call = reply.tool_calls[0];
        ToolCall tc;
        tc.call_id = call.value("id", std::string("call_0"));
        const json& fn = call.value("function", json::object());
        tc.tool = fn.value("name", std::string{});
        std::string raw = fn.value("arguments", std::string("{}"));
        tc.arguments = json::parse(raw.empty() ? "{}" : raw, nullptr, false);
        if (tc.tool.empty() || tc.arguments.is_discarded() || !tc.arguments.is_object()) {
            out.error = "malformed function call";
            return out;
        }
        out.kind = ReactReply::Kind::action;
        out.call = std::move(tc);
        return out;
    }

    std::size_t action_at = first_line_starting(lines, "Action:");
    std::size_t conclusion_at = first_line_starting(lines, "Conclusion:");
    if (conclusion_at < lines.size() && conclusion_at <= action_at) {
        std::string status = text::to_lower(field(lines, "Conclusion:").value_or(""));
        if (status == "finished") out.status = ConclusionStatus::finished;
        else if (status == "pending") out.status = ConclusionStatus::pending;
        else {
            out.error = "conclusion status must be finished or pending";
            return out;
        }
        out.kind = ReactReply::Kind::conclusion;
        out.summary = field(lines, "Summary:").value_or(out.thought);
        return out;
    }
    if (action_at < lines.size()) {
        ToolCall tc;
        tc.tool = field(lines, "Action:").value_or("");
        std::string input = field(lines, "Action Input:").value_or("{}");
        if (input.empty()) input = "{}";
        tc.arguments = json::parse(input, nullptr, false);
        if (tc.tool.empty() || tc.arguments.is_discarded() || !tc.arguments.is_object()) {
            out.error = "Action Input must be a JSON object";
            return out;
        }
        out.kind = ReactReply::Kind::action;
        out.call = std::move(tc);
        return out;
    }
    out.error = "reply has neither an Action nor a Conclusion";
    return out;
}

ReactResult react_loop(const ExpertProfile& agent, const ToolRegistry& tools, const std::string& task,
                       int max_steps, const LlmClient& llm, const PromptLibrary& prompts) {
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");

    auto messages = render_prompt(prompts, "react_executor",
                                  {{"name", agent.name},
                                   {"description", agent.description},
                                   {"tools", tools.describe()},
                                   {"task", task}});
    const auto final_notice = render_prompt(prompts, "react_final", {});

    ReactResult result;
    int malformed_in_a_row = 0;
    for (int step = 1; step <= max_steps; ++step) {
        const bool last = step == max_steps;
        if (last) messages.insert(messages.end(), final_notice.begin(), final_notice.end());

        ChatMessage reply = llm.ask(agent.name, messages, last ? std::nullopt : std::optional<json>(tools.schemas()));
        ReactReply parsed = parse_react_reply(reply);

        ReactStep record{step, parsed.thought, parsed.call, {}, parsed.kind == ReactReply::Kind::malformed};

        if (parsed.kind == ReactReply::Kind::conclusion) {
            result.steps.push_back(record);
            result.conclusion = Conclusion{parsed.status, parsed.summary, step, false};
            return result;
        }
        if (last) {
            record.observation = "(final step: no tool executed)";
            result.steps.push_back(record);
            std::string summary = text::trim(reply.content);
            result.conclusion = Conclusion{ConclusionStatus::pending,
                                           summary.empty() ? "no conclusion reached" : summary, step, true};
            return result;
        }
        if (parsed.kind == ReactReply::Kind::malformed) {
            record.observation = "error: " + parsed.error;
            result.steps.push_back(record);
            if (++malformed_in_a_row >= 2) {
                result.conclusion = Conclusion{ConclusionStatus::pending,
                                               "stopped after repeated malformed replies: " + parsed.error, step,
                                               true};
                return result;
            }
            messages.push_back(ChatMessage{Role::assistant, reply.content.empty() ? "(empty)" : reply.content,
                                           std::nullopt, json(), std::nullopt});
            messages.push_back(user("Observation: error: " + parsed.error +
                                    ". Reply with Action / Action Input or with Conclusion / Summary."));
            continue;
        }
        malformed_in_a_row = 0;

        ToolCall& call = *record.call;
        call.step = step;
        if (!tools.contains(call.tool)) {
            record.observation = "error: unknown tool '" + call.tool + "'; available: " +
                                 text::join(tools.names(), ", ");
        } else {
            try {
                record.observation = tools.get(call.tool).run(call.arguments);
            } catch (const std::exception& e) {
                record.observation = std::string("error: ") + e.what();
            }
        }

        if (call.call_id) {
            ChatMessage echo{Role::assistant, reply.content, std::nullopt, reply.tool_calls, std::nullopt};
            messages.push_back(echo);
            messages.push_back(ChatMessage{Role::tool, record.observation, call.tool, json(), call.call_id});
        } else {
            messages.push_back(ChatMessage{Role::assistant, reply.content, std::nullopt, json(), std::nullopt});
            messages.push_back(user("Observation: " + record.observation));
        }
        result.steps.push_back(std::move(record));
    }
    // Unreachable: the last step always returns.
    throw Error("react loop ended without a conclusion");
}

} // namespace agentkernel
