#pragma once

// Randomized protocol trials shared by the unit tests and the acceptance binary. Each trial builds
// a scripted transcript, predicts the outcome with an independent model, runs the real protocol,
// and returns an empty string on agreement or a description of the first mismatch.

#include <random>
#include <string>

#include "agentkernel/decision.hpp"
#include "agentkernel/react.hpp"
#include "agentkernel/text.hpp"
#include "test_support.hpp"

namespace testing {

inline bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<>(0, 1)(rng) < p; }

inline int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<>(lo, hi)(rng); }

// -- vertical -----------------------------------------------------------------------------------

inline std::string vertical_trial(std::mt19937_64& rng, bool* immediate_approve = nullptr) {
    using namespace agentkernel;
    const int n_reviewers = uniform(rng, 1, 3);
    const int k_max = uniform(rng, 1, 4);
    const double approve_p = std::uniform_real_distribution<>(0.2, 1.0)(rng);

    ExpertProfile solver{"Solver", "solves", 0};
    std::vector<ExpertProfile> reviewers;
    for (int r = 0; r < n_reviewers; ++r) reviewers.push_back({"Reviewer" + std::to_string(r), "reviews", r + 1});

    Script script;
    for (int p = 0; p <= k_max; ++p) script.push_back({"Solver", "proposal-" + std::to_string(p)});

    // verdicts[pass][reviewer]: final approval after the optional re-ask.
    std::vector<std::vector<bool>> verdicts(static_cast<std::size_t>(k_max + 1));
    std::vector<std::vector<std::string>> critiques(static_cast<std::size_t>(k_max + 1));
    for (int p = 0; p <= k_max; ++p) {
        for (int r = 0; r < n_reviewers; ++r) {
            const std::string who = reviewers[static_cast<std::size_t>(r)].name;
            const std::string crit = "fix " + who + " pass " + std::to_string(p);
            bool approve = chance(rng, approve_p);
            bool garbled = chance(rng, 0.15);
            bool garbled_twice = garbled && chance(rng, 0.3);
            if (garbled) script.push_back({who, "looks fine to me"});
            if (garbled_twice) {
                script.push_back({who, "still no marker"});
                approve = false;
            } else {
                script.push_back({who, approve ? "APPROVE\nok" : "REJECT\n" + crit});
            }
            verdicts[static_cast<std::size_t>(p)].push_back(approve);
            critiques[static_cast<std::size_t>(p)].push_back(approve ? "" : garbled_twice ? "still no marker" : crit);
        }
    }

    // Independent model of the review loop.
    int expected_k = 0;
    Termination expected_term = Termination::consensus;
    for (int p = 0;; ++p) {
        bool all = true;
        for (bool v : verdicts[static_cast<std::size_t>(p)]) all = all && v;
        if (all) break;
        expected_k = p + 1;
        if (expected_k >= k_max) {
            expected_term = Termination::refinement_cap;
            break;
        }
    }
    if (immediate_approve) *immediate_approve = expected_k == 0;

    auto provider = scripted(script);
    DecisionOutcome out;
    try {
        out = decide_vertical(solver, reviewers, "ctx", k_max, client(provider), PromptLibrary::builtin());
    } catch (const std::exception& e) {
        return std::string("vertical threw: ") + e.what();
    }
    const auto& d = out.decision;
    if (d.refinements > k_max) return "refinements exceed k_max";
    if (d.refinements != expected_k) {
        return "refinements " + std::to_string(d.refinements) + " != expected " + std::to_string(expected_k);
    }
    std::string last_solver;
    for (const auto& t : out.discussion.turns) {
        if (t.agent == "Solver") last_solver = t.text;
    }
    if (d.decision_text != last_solver) return "decision is not the last solver proposal";
    if (d.decision_text != "proposal-" + std::to_string(expected_k)) return "decision is not a_k";
    if (out.discussion.terminated_by != expected_term) return "termination reason mismatch";
    if (out.reviews.size() != static_cast<std::size_t>(expected_term == Termination::consensus ? expected_k + 1 : expected_k)) {
        return "review pass count mismatch";
    }
    // Each refinement prompt carries the critiques of the pass before it.
    auto solver_prompts = prompts_to(*provider, "Solver");
    if (solver_prompts.size() != static_cast<std::size_t>(expected_k + 1)) return "solver call count mismatch";
    for (int k = 1; k <= expected_k; ++k) {
        for (const auto& c : critiques[static_cast<std::size_t>(k - 1)]) {
            if (!c.empty() && solver_prompts[static_cast<std::size_t>(k)].find(c) == std::string::npos) {
                return "refinement prompt " + std::to_string(k) + " lacks critique '" + c + "'";
            }
        }
    }
    // Vertical turns alternate a solver turn with a block of reviewer turns.
    std::size_t i = 0;
    const auto& turns = out.discussion.turns;
    while (i < turns.size()) {
        if (turns[i].agent != "Solver") return "expected a solver turn";
        ++i;
        for (int r = 0; r < n_reviewers && i < turns.size(); ++r, ++i) {
            if (turns[i].agent != reviewers[static_cast<std::size_t>(r)].name) return "reviewer block out of order";
        }
    }
    return {};
}

// -- horizontal ---------------------------------------------------------------------------------

inline bool oracle_consensus(const std::vector<std::pair<std::string, std::string>>& turns,
                             const std::vector<std::string>& agents) {
    for (const auto& a : agents) {
        const std::string* latest = nullptr;
        for (const auto& [who, body] : turns) {
            if (who == a) latest = &body;
        }
        if (!latest) return false;
        std::string b = *latest;
        while (!b.empty() && std::isspace(static_cast<unsigned char>(b.back()))) b.pop_back();
        const std::string token = "[END]";
        if (b.size() < token.size() || b.substr(b.size() - token.size()) != token) return false;
    }
    return true;
}

inline std::string horizontal_trial(std::mt19937_64& rng) {
    using namespace agentkernel;
    const int n = uniform(rng, 2, 4);
    const int max_turns = uniform(rng, 1, 14);
    const double end_p = std::uniform_real_distribution<>(0.0, 0.9)(rng);
    const bool require_assignments = chance(rng, 0.5);

    std::vector<ExpertProfile> agents;
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
        agents.push_back({"Agent" + std::to_string(i), "member", i});
        names.push_back(agents.back().name);
    }

    Script script;
    std::vector<std::pair<std::string, std::string>> planned;
    for (int t = 0; t < max_turns; ++t) {
        const std::string& who = names[static_cast<std::size_t>(t % n)];
        std::string body = "turn " + std::to_string(t);
        int style = uniform(rng, 0, 3);
        if (chance(rng, end_p)) body += style == 0 ? " [END]  \n" : " [END]";
        else if (style == 0) body += " [END] but one more thing";
        script.push_back({who, body});
        planned.push_back({who, body});
    }
    std::string summary;
    for (const auto& nm : names) summary += nm + ": task for " + nm + "\n";
    script.push_back({summarizer_agent, require_assignments ? summary : "final answer"});

    // Independent model: stop at the first turn after which consensus holds.
    std::size_t expected_turns = static_cast<std::size_t>(max_turns);
    bool expected_consensus = false;
    for (std::size_t t = 1; t <= planned.size(); ++t) {
        std::vector<std::pair<std::string, std::string>> prefix(planned.begin(), planned.begin() + static_cast<long>(t));
        if (oracle_consensus(prefix, names)) {
            expected_turns = t;
            expected_consensus = true;
            break;
        }
    }

    auto provider = scripted(script);
    DecisionOutcome out;
    try {
        out = decide_horizontal(agents, "ctx", max_turns, require_assignments, client(provider), PromptLibrary::builtin());
    } catch (const std::exception& e) {
        return std::string("horizontal threw: ") + e.what();
    }
    const auto& turns = out.discussion.turns;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (turns[i].agent != names[i % static_cast<std::size_t>(n)]) return "turn order is not round-robin";
    }
    if (turns.size() != expected_turns) {
        return "turn count " + std::to_string(turns.size()) + " != expected " + std::to_string(expected_turns);
    }
    std::vector<std::pair<std::string, std::string>> actual;
    for (const auto& t : turns) actual.push_back({t.agent, t.text});
    bool held = oracle_consensus(actual, names);
    bool by_consensus = out.discussion.terminated_by == Termination::consensus;
    if (by_consensus != held || by_consensus != expected_consensus) return "termination does not match consensus";
    if (!by_consensus && out.discussion.terminated_by != Termination::turn_cap) return "expected turn_cap";
    if (out.summarizer_calls != 1) return "summarizer calls != 1";
    if (prompts_to(*provider, summarizer_agent).size() != 1) return "summarizer invoked more than once";
    if (require_assignments) {
        if (out.decision.assignments.size() != names.size()) return "assignments do not cover the group";
        for (const auto& nm : names) {
            auto it = out.decision.assignments.find(nm);
            if (it == out.decision.assignments.end() || it->second != "task for " + nm) return "assignment mismatch";
        }
    }
    return {};
}

// -- ReAct --------------------------------------------------------------------------------------

inline std::string react_action(const std::string& tool, const json& args) {
    return "Thought: working\nAction: " + tool + "\nAction Input: " + args.dump();
}

inline std::string react_conclusion(const std::string& status, const std::string& summary) {
    return "Thought: done\nConclusion: " + status + "\nSummary: " + summary;
}

/// `never_concludes` scripts an agent that only ever calls tools.
inline std::string react_trial(std::mt19937_64& rng, bool never_concludes, const std::string& tag = "") {
    using namespace agentkernel;
    constexpr int cap = default_react_steps;
    ToolRegistry tools;
    tools.add(calculator_tool());

    Script script;
    // Independent model of the loop over the generated replies.
    int expected_steps = 0;
    std::optional<ConclusionStatus> expected_status;
    bool expected_forced = false;
    int malformed_run = 0;
    for (int step = 1; step <= cap; ++step) {
        std::string reply;
        int kind = never_concludes ? uniform(rng, 0, 1) : uniform(rng, 0, 5);
        bool concludes = false;
        bool malformed = false;
        switch (kind) {
        case 0: reply = react_action("calculator", {{"expr", std::to_string(uniform(rng, 1, 9)) + "*" + std::to_string(uniform(rng, 1, 9))}}); break;
        case 1: reply = react_action("web_search", {{"q", "x"}}); break;
        case 2: reply = "I am not sure what to do"; malformed = true; break;
        case 3: reply = react_conclusion("finished", "all done" + tag); concludes = true; break;
        case 4: reply = react_conclusion("pending", "blocked" + tag); concludes = true; break;
        default: reply = react_action("calculator", {{"expr", "2^10"}}); break;
        }
        script.push_back({"Worker", reply});
        if (expected_status) continue;
        if (concludes) {
            expected_steps = step;
            expected_status = kind == 3 ? ConclusionStatus::finished : ConclusionStatus::pending;
            continue;
        }
        if (step == cap) {
            expected_steps = step;
            expected_status = ConclusionStatus::pending;
            expected_forced = true;
            continue;
        }
        if (malformed) {
            if (++malformed_run >= 2) {
                expected_steps = step;
                expected_status = ConclusionStatus::pending;
                expected_forced = true;
            }
        } else {
            malformed_run = 0;
        }
    }

    auto provider = scripted(script);
    ReactResult r;
    try {
        r = react_loop({"Worker", "uses tools", 0}, tools, "compute things", cap, client(provider),
                       PromptLibrary::builtin());
    } catch (const std::exception& e) {
        return std::string("react threw: ") + e.what();
    }
    const auto& c = r.conclusion;
    if (c.steps_used > cap) return "steps_used exceeds the cap";
    if (c.steps_used < 1) return "no step recorded";
    if (c.status != ConclusionStatus::pending && c.status != ConclusionStatus::finished) return "bad status";
    if (c.steps_used != expected_steps) {
        return "steps_used " + std::to_string(c.steps_used) + " != expected " + std::to_string(expected_steps);
    }
    if (c.status != *expected_status) return "status mismatch";
    if (c.forced != expected_forced) return "forced flag mismatch";
    if (r.steps.size() != static_cast<std::size_t>(c.steps_used)) return "step records do not match steps_used";
    if (never_concludes && (c.steps_used != cap || c.status != ConclusionStatus::pending)) {
        return "never-concluding agent did not hit the cap with a pending conclusion";
    }
    return {};
}

} // namespace testing
