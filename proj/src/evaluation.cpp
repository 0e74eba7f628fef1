#include "agentkernel/evaluation.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <regex>

#include "agentkernel/calculator.hpp"
#include "agentkernel/concepts.hpp"
#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

void to_json(json& j, const GoldData& g) {
    j = json::object();
    if (g.answer) j["answer"] = *g.answer;
    if (g.tests) j["tests"] = *g.tests;
    if (g.concepts) j["concepts"] = *g.concepts;
    if (g.target) j["target"] = {{"item", g.target->item}, {"count", g.target->count}};
    if (g.reference) j["reference"] = *g.reference;
}

void from_json(const json& j, GoldData& g) {
    g = GoldData{};
    if (j.contains("answer")) {
        const json& a = j["answer"];
        g.answer = a.is_string() ? a.get<std::string>() : a.dump();
    }
    if (j.contains("tests")) g.tests = j["tests"].get<std::string>();
    if (j.contains("concepts")) g.concepts = j["concepts"].get<std::vector<std::string>>();
    if (j.contains("target")) {
        const json& t = j["target"];
        g.target = CraftTarget{t.at("item").get<std::string>(), t.value("count", 1)};
    }
    if (j.contains("reference")) g.reference = j["reference"].get<std::string>();
}

Checker checker_for(TaskKind kind) {
    switch (kind) {
    case TaskKind::math:
    case TaskKind::tool: return Checker::exact_numeric;
    case TaskKind::code: return Checker::all_tests_pass;
    case TaskKind::constrained_generation: return Checker::full_coverage;
    case TaskKind::crafting: return Checker::crafting_goal;
    case TaskKind::qa: break;
    }
    throw ConfigError("task kind " + to_string(kind) + " has no programmatic checker");
}

const char* gold_field(Checker checker) {
    switch (checker) {
    case Checker::exact_numeric: return "answer";
    case Checker::all_tests_pass: return "tests";
    case Checker::full_coverage: return "concepts";
    case Checker::crafting_goal: return "target";
    }
    return "?";
}

void require_gold(Checker checker, const GoldData& gold) {
    bool present = false;
    switch (checker) {
    case Checker::exact_numeric: present = gold.answer && extract_last_number(*gold.answer).has_value(); break;
    case Checker::all_tests_pass: present = gold.tests.has_value(); break;
    case Checker::full_coverage: present = gold.concepts && !gold.concepts->empty(); break;
    case Checker::crafting_goal: present = gold.target && !gold.target->item.empty() && gold.target->count > 0; break;
    }
    if (!present) throw ConfigError(std::string("gold data is missing field '") + gold_field(checker) + "'");
}

std::optional<double> extract_last_number(std::string_view text) {
    std::string cleaned;
    for (std::size_t i = 0; i < text.size(); ++i) {
        bool digit_comma = text[i] == ',' && i > 0 && i + 1 < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                           std::isdigit(static_cast<unsigned char>(text[i + 1]));
        if (!digit_comma) cleaned += text[i];
    }
    static const std::regex number(R"(([-+]?)(\d+(?:\.\d+)?))");
    std::optional<double> last;
    for (auto it = std::sregex_iterator(cleaned.begin(), cleaned.end(), number); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        auto start = static_cast<std::size_t>(m.position(0));
        if (start > 0 && std::isdigit(static_cast<unsigned char>(cleaned[start - 1]))) continue;
        bool negative = m[1].str() == "-";
        if (m[1].length() > 0 && start > 0 && std::isalnum(static_cast<unsigned char>(cleaned[start - 1]))) {
            negative = false;
        }
        double v = std::stod(m[2].str());
        last = negative ? -v : v;
    }
    return last;
}

std::optional<Verdict> parse_verdict(std::string_view response) {
    auto [head, rest] = text::head_and_rest(std::string(response));
    head = text::trim(head);
    std::string feedback = text::trim(rest);
    if (head == "SOLVED") return Verdict::accept(feedback);
    if (head == "UNSOLVED") {
        return Verdict::reject(feedback.empty() ? "The evaluator rejected the result without details." : feedback);
    }
    return std::nullopt;
}

Verdict evaluate_agent(const std::string& state_rendering, const Goal& goal, const LlmClient& llm,
                       const PromptLibrary& prompts, const std::string& template_id,
                       const std::optional<std::string>& reference) {
    Bindings b{{"goal", goal.text}, {"state", state_rendering}};
    if (reference) b["reference"] = *reference;
    auto messages = render_prompt(prompts, template_id, b);
    ChatMessage reply = llm.ask(evaluator_agent, messages);
    if (auto v = parse_verdict(reply.content)) return *v;

    messages.push_back(ChatMessage{Role::assistant, reply.content.empty() ? "(empty)" : reply.content, std::nullopt,
                                   json(), std::nullopt});
    auto reminder = render_prompt(prompts, "format_reminder",
                                  {{"expected", "a first line that is exactly SOLVED or UNSOLVED, then feedback"}});
    messages.insert(messages.end(), reminder.begin(), reminder.end());
    ChatMessage second = llm.ask(evaluator_agent, messages);
    if (auto v = parse_verdict(second.content)) return *v;
    std::string raw = text::trim(second.content);
    return Verdict::reject(raw.empty() ? "The evaluator reply could not be parsed." : raw);
}

namespace {

Verdict check_numeric(const json& state, const GoldData& gold) {
    double expected = *extract_last_number(*gold.answer);
    const json& answer = state.contains("answer") ? state["answer"] : json(nullptr);
    if (!answer.is_string()) return Verdict::reject("No answer was produced.", 0.0);
    auto got = extract_last_number(answer.get<std::string>());
    if (!got) return Verdict::reject("The answer does not end with a numeric result.", 0.0);
    if (std::fabs(*got - expected) <= 1e-6 * std::max(1.0, std::fabs(expected))) {
        return Verdict::accept("The final answer is correct.", 1.0);
    }
    return Verdict::reject("The final answer " + format_number(*got) +
                               " is incorrect. Recheck each step of the computation.",
                           0.0);
}

Verdict check_tests(const json& state) {
    if (state.contains("error") && state["error"].is_string()) {
        return Verdict::reject("Execution failed: " + state["error"].get<std::string>(), 0.0);
    }
    if (!state.contains("report") || state["report"].is_null()) return Verdict::reject("No code was tested.", 0.0);
    TestReport report = state["report"].get<TestReport>();
    if (report.all_passed() && report.total > 0) return Verdict::accept("All unit tests passed.", 1.0);
    if (report.total == 0) return Verdict::reject("The test suite ran no tests.", 0.0);
    std::vector<std::string> names;
    for (const auto& f : report.failures) names.push_back(f.name + " (" + f.message + ")");
    return Verdict::reject(std::to_string(report.total - report.passed) + " of " + std::to_string(report.total) +
                               " unit tests failed: " + text::join(names, "; "),
                           report.pass_rate());
}

Verdict check_coverage(const json& state, const GoldData& gold) {
    const json& answer = state.contains("answer") ? state["answer"] : json(nullptr);
    std::string text = answer.is_string() ? answer.get<std::string>() : "";
    Coverage c = concept_coverage(text, *gold.concepts);
    if (c.missing.empty()) return Verdict::accept("Every required concept is covered.", 1.0);
    std::vector<std::string> missing(c.missing.begin(), c.missing.end());
    return Verdict::reject("Missing concepts: " + text::join(missing, ", "), c.fraction());
}

Verdict check_crafting(const json& state, const GoldData& gold) {
    const CraftTarget& target = *gold.target;
    std::string best_agent;
    int best = 0;
    for (const auto& agent : state.at("world").at("agents")) {
        int n = agent.at("inventory").value(target.item, 0);
        if (n > best) {
            best = n;
            best_agent = agent.at("name").get<std::string>();
        }
    }
    if (best >= target.count) {
        return Verdict::accept(best_agent + " holds " + std::to_string(best) + " " + target.item + ".", 1.0);
    }
    std::string feedback = "No agent holds " + std::to_string(target.count) + " " + target.item + " (best: " +
                           std::to_string(best) + ").";
    std::vector<std::string> unmet;
    for (const auto& r : state.value("results", json::array())) {
        std::string agent = r.at("agent").get<std::string>();
        if (!r.value("parse_error", std::string{}).empty()) {
            unmet.push_back(agent + ": unparsable assignment (" + r["parse_error"].get<std::string>() + ")");
        }
        for (const auto& s : r.at("subgoals")) {
            if (!s.at("completed").get<bool>()) {
                unmet.push_back(agent + ": " + s.at("text").get<std::string>() + " failed (" +
                                s.at("reason").get<std::string>() + ")");
            }
        }
    }
    if (!unmet.empty()) feedback += " Unmet sub-tasks: " + text::join(unmet, "; ") + ".";
    std::vector<std::string> inventories;
    for (const auto& agent : state.at("world").at("agents")) {
        std::vector<std::string> items;
        for (const auto& [item, n] : agent.at("inventory").items()) items.push_back(std::to_string(n.get<int>()) + " " + item);
        inventories.push_back(agent.at("name").get<std::string>() + " has " +
                              (items.empty() ? std::string("nothing") : text::join(items, ", ")));
    }
    feedback += " Inventories: " + text::join(inventories, "; ") + ".";
    return Verdict::reject(feedback, 0.0);
}

} // namespace

Verdict evaluate_programmatic(const json& state, const Goal&, Checker checker, const GoldData& gold) {
    require_gold(checker, gold);
    switch (checker) {
    case Checker::exact_numeric: return check_numeric(state, gold);
    case Checker::all_tests_pass: return check_tests(state);
    case Checker::full_coverage: return check_coverage(state, gold);
    case Checker::crafting_goal: return check_crafting(state, gold);
    }
    throw ConfigError("unknown checker");
}

std::optional<Verdict> TerminalFeedbackSource::request(const std::string& state_rendering, const Goal& goal) {
    out_ << "Goal:\n" << goal.text << "\n\nResult:\n" << state_rendering << "\n\n";
    std::string line;
    while (true) {
        out_ << "Is the goal solved? [y/n] " << std::flush;
        if (!std::getline(in_, line)) return std::nullopt;
        std::string answer = text::to_lower(text::trim(line));
        if (answer == "y" || answer == "yes") return Verdict::accept();
        if (answer != "n" && answer != "no") continue;
        while (true) {
            out_ << "Feedback for the next round: " << std::flush;
            if (!std::getline(in_, line)) return std::nullopt;
            if (!text::trim(line).empty()) return Verdict::reject(text::trim(line));
            out_ << "A rejection needs feedback.\n";
        }
    }
}

std::optional<Verdict> evaluate_human(const std::string& state_rendering, const Goal& goal, FeedbackSource* source) {
    if (!source) return std::nullopt;
    constexpr int max_asks = 5;
    for (int i = 0; i < max_asks; ++i) {
        auto v = source->request(state_rendering, goal);
        if (!v) return std::nullopt;
        try {
            v->validate();
            return v;
        } catch (const ValidationError&) {
            // Invalid verdicts are never accepted; ask again.
        }
    }
    throw ValidationError("feedback source kept returning invalid verdicts");
}

} // namespace agentkernel
