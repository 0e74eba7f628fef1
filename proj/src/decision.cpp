#include "agentkernel/decision.hpp"

#include <algorithm>
#include <regex>

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

void to_json(json& j, const DecisionOutcome& o) {
    j = json{{"decision", o.decision},
             {"discussion", o.discussion},
             {"reviews", o.reviews},
             {"summarizer_calls", o.summarizer_calls}};
}

void from_json(const json& j, DecisionOutcome& o) {
    o.decision = j.at("decision").get<GroupDecision>();
    o.discussion = j.at("discussion").get<Discussion>();
    o.reviews = j.at("reviews").get<std::vector<std::vector<Review>>>();
    o.summarizer_calls = j.at("summarizer_calls").get<int>();
}

bool detect_consensus(const std::vector<Turn>& turns, const std::vector<std::string>& agents) {
    if (agents.empty()) return false;
    for (const auto& agent : agents) {
        auto latest = std::find_if(turns.rbegin(), turns.rend(),
                                   [&](const Turn& t) { return t.agent == agent; });
        if (latest == turns.rend()) return false;
        std::string body = text::trim_right(latest->text);
        if (!body.ends_with(end_token)) return false;
    }
    return true;
}

std::optional<Review> parse_review(const std::string& reviewer, std::string_view response) {
    auto [head, rest] = text::head_and_rest(response);
    head = text::trim(head);
    std::string critique = text::trim(rest);
    if (head == "APPROVE") return Review{reviewer, true, critique};
    if (head == "REJECT") {
        if (critique.empty()) critique = "(rejected without details)";
        return Review{reviewer, false, critique};
    }
    return std::nullopt;
}

namespace {

std::string strip_decoration(std::string s) {
    static const std::regex bullet(R"(^\s*(?:[-*•]|\d+[.)])\s+)");
    s = std::regex_replace(s, bullet, "");
    s = text::trim(s);
    return s;
}

std::string strip_emphasis(std::string name) {
    name.erase(std::remove(name.begin(), name.end(), '*'), name.end());
    return text::trim(name);
}

std::optional<std::string> match_agent(const std::string& candidate,
                                       const std::vector<std::string>& agents) {
    for (const auto& a : agents) {
        if (a == candidate) return a;
    }
    std::string lowered = text::to_lower(candidate);
    for (const auto& a : agents) {
        if (text::to_lower(a) == lowered) return a;
    }
    return std::nullopt;
}

ChatMessage assistant(const std::string& content) {
    return ChatMessage{Role::assistant, content.empty() ? std::string("(empty)") : content,
                       std::nullopt, json(), std::nullopt};
}

std::vector<std::string> names_of(const std::vector<ExpertProfile>& profiles) {
    std::vector<std::string> names;
    for (const auto& p : profiles) names.push_back(p.name);
    return names;
}

} // namespace

std::map<std::string, std::string> parse_assignments(std::string_view body,
                                                     const std::vector<std::string>& agents) {
    std::map<std::string, std::string> out;
    std::optional<std::string> current;
    for (const auto& line : text::split_lines(body)) {
        for (const auto& piece : text::split(line, ';')) {
            std::string segment = strip_decoration(piece);
            if (segment.empty()) continue;
            auto colon = segment.find(':');
            std::optional<std::string> who;
            if (colon != std::string::npos) who = match_agent(strip_emphasis(segment.substr(0, colon)), agents);
            if (who) {
                current = who;
                std::string task = text::trim(segment.substr(colon + 1));
                auto& slot = out[*who];
                if (!task.empty()) slot = slot.empty() ? task : slot + "; " + task;
            } else if (current) {
                auto& slot = out[*current];
                slot = slot.empty() ? segment : slot + "; " + segment;
            }
        }
    }
    for (auto it = out.begin(); it != out.end();) {
        it = it->second.empty() ? out.erase(it) : std::next(it);
    }
    return out;
}

std::string render_transcript(const std::vector<Turn>& turns) {
    if (turns.empty()) return "(no messages yet)";
    std::string out;
    for (const auto& t : turns) {
        if (!out.empty()) out += "\n\n";
        out += t.agent + ": " + t.text;
    }
    return out;
}

DecisionOutcome decide_solo(const ExpertProfile& solver, const std::string& context,
                            const LlmClient& llm, const PromptLibrary& prompts) {
    auto reply = llm.ask(solver.name,
                         render_prompt(prompts, "solver",
                                       {{"name", solver.name},
                                        {"description", solver.description},
                                        {"context", context}}));
    DecisionOutcome out;
    out.decision.decision_text = reply.content;
    out.discussion.structure = Structure::vertical;
    out.discussion.turns.push_back({solver.name, reply.content});
    out.discussion.terminated_by = Termination::consensus;
    return out;
}

DecisionOutcome decide_vertical(const ExpertProfile& solver,
                                const std::vector<ExpertProfile>& reviewers,
                                const std::string& context, int k_max, const LlmClient& llm,
                                const PromptLibrary& prompts) {
    if (reviewers.empty()) throw ConfigError("vertical decision requires at least one reviewer");
    if (k_max < 1) throw ConfigError("k_max must be >= 1");

    DecisionOutcome out;
    out.discussion.structure = Structure::vertical;
    const Bindings solver_identity{{"name", solver.name}, {"description", solver.description}};

    Bindings b = solver_identity;
    b["context"] = context;
    std::string proposal = llm.ask(solver.name, render_prompt(prompts, "solver", b)).content;
    out.discussion.turns.push_back({solver.name, proposal});

    int k = 0;
    while (true) {
        std::vector<Review> pass;
        for (const auto& reviewer : reviewers) {
            auto messages = render_prompt(prompts, "reviewer",
                                          {{"name", reviewer.name},
                                           {"description", reviewer.description},
                                           {"context", context},
                                           {"proposal", proposal}});
            std::string raw = llm.ask(reviewer.name, messages).content;
            auto review = parse_review(reviewer.name, raw);
            if (!review) {
                messages.push_back(assistant(raw));
                auto reminder = render_prompt(
                    prompts, "format_reminder",
                    {{"expected", "Start with a line containing exactly APPROVE or REJECT."}});
                messages.insert(messages.end(), reminder.begin(), reminder.end());
                raw = llm.ask(reviewer.name, messages).content;
                review = parse_review(reviewer.name, raw);
                if (!review) {
                    review = Review{reviewer.name, false,
                                    text::trim(raw).empty() ? std::string("(unparsable review)") : raw};
                }
            }
            out.discussion.turns.push_back({reviewer.name, raw});
            pass.push_back(*review);
        }
        out.reviews.push_back(pass);

        bool all_approved = std::all_of(pass.begin(), pass.end(), [](const Review& r) { return r.approved; });
        if (all_approved) {
            out.discussion.terminated_by = Termination::consensus;
            break;
        }

        std::string critiques;
        for (const auto& r : pass) {
            if (!r.approved) critiques += "- " + r.reviewer + ": " + r.critique + "\n";
        }
        Bindings rb = solver_identity;
        rb["context"] = context;
        rb["proposal"] = proposal;
        rb["critiques"] = text::trim_right(critiques);
        proposal = llm.ask(solver.name, render_prompt(prompts, "solver_refine", rb)).content;
        out.discussion.turns.push_back({solver.name, proposal});
        ++k;
        // The k_max-th refinement is final; it is not sent back for review.
        if (k >= k_max) {
            out.discussion.terminated_by = Termination::refinement_cap;
            break;
        }
    }
    out.decision.decision_text = proposal;
    out.decision.refinements = k;
    return out;
}

DecisionOutcome decide_horizontal(const std::vector<ExpertProfile>& agents,
                                  const std::string& context, int max_turns,
                                  bool require_assignments, const LlmClient& llm,
                                  const PromptLibrary& prompts) {
    if (agents.size() < 2) throw ConfigError("horizontal decision requires at least two agents");
    if (max_turns < 1) throw ConfigError("max_discussion_turns must be >= 1");

    const auto names = names_of(agents);
    const std::string members = text::join(names, ", ");

    DecisionOutcome out;
    out.discussion.structure = Structure::horizontal;
    out.discussion.terminated_by = Termination::turn_cap;
    auto& turns = out.discussion.turns;

    for (int t = 0; t < max_turns; ++t) {
        const auto& speaker = agents[static_cast<std::size_t>(t) % agents.size()];
        auto reply = llm.ask(speaker.name, render_prompt(prompts, "discussant",
                                                         {{"name", speaker.name},
                                                          {"description", speaker.description},
                                                          {"members", members},
                                                          {"context", context},
                                                          {"transcript", render_transcript(turns)}}));
        turns.push_back({speaker.name, reply.content});
        if (detect_consensus(turns, names)) {
            out.discussion.terminated_by = Termination::consensus;
            break;
        }
    }

    const std::string transcript = render_transcript(turns);
    if (!require_assignments) {
        auto reply = llm.ask(summarizer_agent,
                             render_prompt(prompts, "summarizer_plain",
                                           {{"context", context}, {"transcript", transcript}}));
        out.summarizer_calls = 1;
        out.decision.decision_text = reply.content;
        return out;
    }

    auto messages = render_prompt(prompts, "summarizer",
                                  {{"context", context}, {"members", members}, {"transcript", transcript}});
    auto reply = llm.ask(summarizer_agent, messages);
    out.summarizer_calls = 1;
    auto assignments = parse_assignments(reply.content, names);

    auto uncovered = [&] {
        std::vector<std::string> missing;
        for (const auto& n : names) {
            if (!assignments.count(n)) missing.push_back(n);
        }
        return missing;
    };

    if (auto missing = uncovered(); !missing.empty()) {
        messages.push_back(assistant(reply.content));
        auto reminder = render_prompt(
            prompts, "format_reminder",
            {{"expected", "Give one \"Name: task\" line for every member. Missing: " +
                              text::join(missing, ", ") + "."}});
        messages.insert(messages.end(), reminder.begin(), reminder.end());
        reply = llm.ask(summarizer_agent, messages);
        out.summarizer_calls = 2;
        assignments = parse_assignments(reply.content, names);
        if (auto still = uncovered(); !still.empty()) {
            throw ParseError("summarizer left agents without an assignment: " + text::join(still, ", "),
                             reply.content);
        }
    }
    out.decision.decision_text = reply.content;
    out.decision.assignments = std::move(assignments);
    return out;
}

} // namespace agentkernel
