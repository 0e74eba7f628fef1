#include "agentkernel/types.hpp"

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

template <typename Enum>
Enum parse_enum(const std::string& text, const char* what) {
    json j = text;
    Enum value = j.get<Enum>();
    // nlohmann maps unknown strings to the first enumerator; detect by round-tripping.
    if (json(value).get<std::string>() != text) {
        throw ConfigError(std::string("unknown ") + what + ": '" + text + "'");
    }
    return value;
}

template TaskKind parse_enum<TaskKind>(const std::string&, const char*);
template Setup parse_enum<Setup>(const std::string&, const char*);
template Structure parse_enum<Structure>(const std::string&, const char*);
template EvaluatorKind parse_enum<EvaluatorKind>(const std::string&, const char*);

std::string to_string(TaskKind kind) { return json(kind).get<std::string>(); }
std::string to_string(Setup setup) { return json(setup).get<std::string>(); }
std::string to_string(Structure structure) { return json(structure).get<std::string>(); }
std::string to_string(EvaluatorKind kind) { return json(kind).get<std::string>(); }

void Goal::validate() const {
    if (text::trim(text).empty()) {
        throw ValidationError("goal text must be non-empty");
    }
}

void to_json(json& j, const Goal& goal) {
    j = json{{"text", goal.text}, {"task_kind", goal.task_kind}};
}

void from_json(const json& j, Goal& goal) {
    goal.text = j.at("text").get<std::string>();
    goal.task_kind = parse_enum<TaskKind>(j.at("task_kind").get<std::string>(), "task kind");
}

void RunConfig::validate() const {
    if (n_experts < 1) throw ConfigError("n_experts must be positive");
    if (max_rounds < 1) throw ConfigError("max_rounds must be positive");
    if (k_max < 1) throw ConfigError("k_max must be positive");
    if (max_discussion_turns && *max_discussion_turns < 1) {
        throw ConfigError("max_discussion_turns must be positive");
    }
    if (setup == Setup::solo && n_experts != 1) {
        throw ConfigError("solo setup requires n_experts = 1");
    }
    if (setup == Setup::cot && max_rounds != 1) {
        throw ConfigError("cot setup requires max_rounds = 1");
    }
    if (provider_ref.empty()) throw ConfigError("provider_ref must be non-empty");
}

int RunConfig::discussion_turn_cap(int group_size) const {
    return max_discussion_turns.value_or(2 * group_size);
}

void to_json(json& j, const RunConfig& c) {
    j = json{{"setup", c.setup},
             {"n_experts", c.n_experts},
             {"structure", c.structure},
             {"max_rounds", c.max_rounds},
             {"k_max", c.k_max},
             {"provider_ref", c.provider_ref},
             {"evaluator_kind", c.evaluator_kind}};
    if (c.max_discussion_turns) j["max_discussion_turns"] = *c.max_discussion_turns;
}

void from_json(const json& j, RunConfig& c) {
    if (j.contains("setup")) c.setup = parse_enum<Setup>(j["setup"].get<std::string>(), "setup");
    if (j.contains("n_experts")) c.n_experts = j["n_experts"].get<int>();
    if (j.contains("structure")) {
        c.structure = parse_enum<Structure>(j["structure"].get<std::string>(), "structure");
    }
    if (j.contains("max_rounds")) c.max_rounds = j["max_rounds"].get<int>();
    if (j.contains("k_max")) c.k_max = j["k_max"].get<int>();
    if (j.contains("max_discussion_turns")) {
        c.max_discussion_turns = j["max_discussion_turns"].get<int>();
    }
    if (j.contains("provider_ref")) c.provider_ref = j["provider_ref"].get<std::string>();
    if (j.contains("evaluator_kind")) {
        c.evaluator_kind =
            parse_enum<EvaluatorKind>(j["evaluator_kind"].get<std::string>(), "evaluator kind");
    }
}

void to_json(json& j, const ExpertProfile& p) {
    j = json{{"name", p.name}, {"description", p.description}, {"index", p.index}};
}

void from_json(const json& j, ExpertProfile& p) {
    p.name = j.at("name").get<std::string>();
    p.description = j.at("description").get<std::string>();
    p.index = j.value("index", 0);
}

void to_json(json& j, const Review& r) {
    j = json{{"reviewer", r.reviewer}, {"approved", r.approved}, {"critique", r.critique}};
}

void from_json(const json& j, Review& r) {
    r.reviewer = j.at("reviewer").get<std::string>();
    r.approved = j.at("approved").get<bool>();
    r.critique = j.at("critique").get<std::string>();
}

void to_json(json& j, const Turn& t) { j = json{{"agent", t.agent}, {"text", t.text}}; }

void from_json(const json& j, Turn& t) {
    t.agent = j.at("agent").get<std::string>();
    t.text = j.at("text").get<std::string>();
}

void to_json(json& j, const Discussion& d) {
    j = json{{"turns", d.turns}, {"structure", d.structure}, {"terminated_by", d.terminated_by}};
}

void from_json(const json& j, Discussion& d) {
    d.turns = j.at("turns").get<std::vector<Turn>>();
    d.structure = j.at("structure").get<Structure>();
    d.terminated_by = j.at("terminated_by").get<Termination>();
}

void to_json(json& j, const GroupDecision& d) {
    j = json{{"decision_text", d.decision_text},
             {"assignments", d.assignments},
             {"refinements", d.refinements}};
}

void from_json(const json& j, GroupDecision& d) {
    d.decision_text = j.at("decision_text").get<std::string>();
    d.assignments = j.at("assignments").get<std::map<std::string, std::string>>();
    d.refinements = j.at("refinements").get<int>();
}

Verdict Verdict::accept(std::string feedback, std::optional<double> score) {
    Verdict v{true, score, std::move(feedback)};
    v.validate();
    return v;
}

Verdict Verdict::reject(std::string feedback, std::optional<double> score) {
    Verdict v{false, score, std::move(feedback)};
    v.validate();
    return v;
}

void Verdict::validate() const {
    if (!solved && text::trim(feedback).empty()) {
        throw ValidationError("a rejecting verdict requires non-empty feedback");
    }
    if (score && (*score < 0.0 || *score > 1.0)) {
        throw ValidationError("verdict score must lie in [0, 1]");
    }
}

void to_json(json& j, const Verdict& v) {
    j = json{{"solved", v.solved}, {"feedback", v.feedback}};
    if (v.score) j["score"] = *v.score;
}

void from_json(const json& j, Verdict& v) {
    v.solved = j.at("solved").get<bool>();
    v.feedback = j.value("feedback", std::string{});
    if (j.contains("score") && !j["score"].is_null()) v.score = j["score"].get<double>();
    else v.score.reset();
}

void to_json(json& j, const TestFailure& f) { j = json{{"name", f.name}, {"message", f.message}}; }

void from_json(const json& j, TestFailure& f) {
    f.name = j.at("name").get<std::string>();
    f.message = j.value("message", std::string{});
}

void to_json(json& j, const TestReport& r) {
    j = json{{"total", r.total}, {"passed", r.passed}, {"failures", r.failures}};
}

void from_json(const json& j, TestReport& r) {
    r.total = j.at("total").get<int>();
    r.passed = j.at("passed").get<int>();
    r.failures = j.value("failures", std::vector<TestFailure>{});
}

void to_json(json& j, const Conclusion& c) {
    j = json{{"status", c.status},
             {"summary", c.summary},
             {"steps_used", c.steps_used},
             {"forced", c.forced}};
}

void from_json(const json& j, Conclusion& c) {
    c.status = j.at("status").get<ConclusionStatus>();
    c.summary = j.at("summary").get<std::string>();
    c.steps_used = j.at("steps_used").get<int>();
    c.forced = j.value("forced", false);
}

} // namespace agentkernel
