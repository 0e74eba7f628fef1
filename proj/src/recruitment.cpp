#include "agentkernel/recruitment.hpp"

#include <map>
#include <regex>
#include <set>

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

void to_json(json& j, const RecruitmentOutcome& o) {
    j = json{{"profiles", o.profiles}, {"raw", o.raw}, {"source", o.source}};
}

void from_json(const json& j, RecruitmentOutcome& o) {
    o.profiles = j.at("profiles").get<std::vector<ExpertProfile>>();
    o.raw = j.at("raw").get<std::string>();
    o.source = j.at("source").get<RecruitmentSource>();
}

std::vector<ExpertProfile> parse_expert_list(std::string_view response) {
    static const std::regex line_re(R"(^\s*\d+\.\s*([^:]+?)\s*:\s*(.*\S)\s*$)");
    std::vector<ExpertProfile> profiles;
    std::set<std::string> used;
    for (const auto& line : text::split_lines(response)) {
        std::smatch m;
        if (!std::regex_match(line, m, line_re)) continue;
        std::string name = text::trim(m[1].str());
        // Markdown emphasis around the name is common in model output.
        while (name.size() > 1 && name.front() == '*' && name.back() == '*') {
            name = text::trim(name.substr(1, name.size() - 2));
        }
        if (name.empty()) continue;
        if (used.count(name)) {
            int suffix = 2;
            while (used.count(name + "-" + std::to_string(suffix))) ++suffix;
            name += "-" + std::to_string(suffix);
        }
        used.insert(name);
        profiles.push_back({name, text::trim(m[2].str()), static_cast<int>(profiles.size())});
    }
    return profiles;
}

std::string render_expert_list(const std::vector<ExpertProfile>& profiles) {
    std::string out;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        out += std::to_string(i + 1) + ". " + profiles[i].name + ": " + profiles[i].description + "\n";
    }
    return out;
}

RecruitmentOutcome recruit(const Goal& goal, const std::optional<std::string>& feedback,
                           int n_experts, const LlmClient& recruiter, const PromptLibrary& prompts) {
    if (n_experts < 1) throw ConfigError("n_experts must be >= 1");
    Bindings bindings{{"goal", goal.text}, {"n_experts", std::to_string(n_experts)}};
    std::string template_id = "recruiter";
    if (feedback) {
        bindings["feedback"] = *feedback;
        template_id = "recruiter_feedback";
    }
    auto messages = render_prompt(prompts, template_id, bindings);

    auto reply = recruiter.ask(recruiter_agent, messages);
    auto profiles = parse_expert_list(reply.content);
    if (static_cast<int>(profiles.size()) != n_experts) {
        messages.push_back(ChatMessage{Role::assistant, reply.content.empty() ? "(empty)" : reply.content,
                                       std::nullopt, json(), std::nullopt});
        auto reminder = render_prompt(
            prompts, "format_reminder",
            {{"expected", "List exactly " + std::to_string(n_experts) +
                              " experts, one per line, as \"N. Name: Description\"."}});
        messages.insert(messages.end(), reminder.begin(), reminder.end());
        reply = recruiter.ask(recruiter_agent, messages);
        profiles = parse_expert_list(reply.content);
        if (static_cast<int>(profiles.size()) != n_experts) {
            throw ParseError("recruiter response yielded " + std::to_string(profiles.size()) +
                                 " experts, expected " + std::to_string(n_experts),
                             reply.content);
        }
    }
    return {std::move(profiles), reply.content, RecruitmentSource::generated};
}

RecruitmentOutcome manual_group(std::vector<ExpertProfile> profiles) {
    if (profiles.empty()) throw ValidationError("manual group must not be empty");
    std::set<std::string> names;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        auto& p = profiles[i];
        if (text::trim(p.name).empty()) throw ValidationError("expert name must be non-empty");
        if (text::trim(p.description).empty()) {
            throw ValidationError("expert '" + p.name + "' has an empty description");
        }
        if (!names.insert(p.name).second) {
            throw ValidationError("duplicate expert name: " + p.name);
        }
        p.index = static_cast<int>(i);
    }
    return {std::move(profiles), {}, RecruitmentSource::manual_override};
}

} // namespace agentkernel
