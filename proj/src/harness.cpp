#include "agentkernel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "agentkernel/error.hpp"
#include "agentkernel/recruitment.hpp"
#include "agentkernel/text.hpp"
#include "agentkernel/tools.hpp"

namespace agentkernel {

namespace {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

Checker parse_checker(const std::string& name) {
    for (Checker c : {Checker::exact_numeric, Checker::all_tests_pass, Checker::full_coverage, Checker::crafting_goal}) {
        if (json(c).get<std::string>() == name) return c;
    }
    throw ConfigError("unknown checker: '" + name + "'");
}

std::string env_string(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

ProviderConfig parse_provider(const std::string& name, const json& j, const HarnessConfig& cfg) {
    ProviderConfig p;
    p.name = name;
    p.type = j.value("type", std::string("scripted"));
    if (p.type == "scripted") {
        if (!j.contains("script")) throw ConfigError("scripted provider '" + name + "' needs a script");
        p.script = cfg.resolve(j["script"].get<std::string>());
        p.options.model = "scripted";
    } else if (p.type == "openai") {
        p.openai.base_url = j.value("base_url", env_string("AGENTKERNEL_BASE_URL", p.openai.base_url));
        p.openai.model = j.value("model", env_string("AGENTKERNEL_MODEL", p.openai.model));
        p.openai.timeout = std::chrono::seconds(j.value("timeout_s", 120));
        p.openai.function_calling = j.value("function_calling", true);
        p.options.model = p.openai.model;
        p.options.function_calling = p.openai.function_calling;
    } else {
        throw ConfigError("provider '" + name + "' has unknown type '" + p.type + "'");
    }
    p.options.temperature = j.value("temperature", 0.0);
    if (p.options.temperature < 0) throw ConfigError("temperature must be >= 0");
    if (j.contains("max_tokens")) p.options.max_tokens = j["max_tokens"].get<int>();
    p.options.retry.max_retries = j.value("max_retries", 2);
    p.options.retry.base_delay = std::chrono::milliseconds(j.value("base_delay_ms", 500));
    if (p.options.retry.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    return p;
}

} // namespace

// -- task spec ------------------------------------------------------------------------------

TaskSpec task_from_json(const json& j, const std::string& suite) {
    TaskSpec t;
    try {
        t.id = j.at("id").get<std::string>();
        t.suite = j.value("suite", suite);
        t.goal.text = j.at("goal").get<std::string>();
        t.goal.task_kind = parse_enum<TaskKind>(j.at("kind").get<std::string>(), "task kind");
        if (j.contains("gold")) t.gold = j["gold"].get<GoldData>();
        t.environment = j.value("environment", json::object());
        if (j.contains("evaluator")) {
            t.evaluator = parse_enum<EvaluatorKind>(j["evaluator"].get<std::string>(), "evaluator kind");
        }
        if (j.contains("checker")) t.checker = parse_checker(j["checker"].get<std::string>());
        if (j.contains("evaluator_template")) t.evaluator_template = j["evaluator_template"].get<std::string>();
        if (j.contains("manual_group")) {
            std::vector<ExpertProfile> group;
            for (const auto& p : j["manual_group"]) {
                group.push_back(ExpertProfile{p.at("name").get<std::string>(), p.at("description").get<std::string>(),
                                              static_cast<int>(group.size())});
            }
            t.manual_group = std::move(group);
        }
        t.overrides = j.value("overrides", json::object());
    } catch (const json::exception& e) {
        throw FieldError("task", std::string("invalid task definition: ") + e.what());
    } catch (const ConfigError& e) {
        throw FieldError("task", std::string("invalid task definition: ") + e.what());
    }
    return t;
}

void to_json(json& j, const TaskSpec& t) {
    j = json{{"id", t.id},           {"suite", t.suite},   {"kind", t.goal.task_kind},
             {"goal", t.goal.text},  {"gold", t.gold},     {"environment", t.environment},
             {"overrides", t.overrides}};
    if (t.evaluator) j["evaluator"] = *t.evaluator;
    if (t.checker) j["checker"] = *t.checker;
    if (t.evaluator_template) j["evaluator_template"] = *t.evaluator_template;
    if (t.manual_group) j["manual_group"] = *t.manual_group;
}

void TaskSpec::validate() const {
    if (text::trim(id).empty()) throw FieldError("id", "task field 'id' must be non-empty");
    if (text::trim(goal.text).empty()) throw FieldError("goal", "task field 'goal' must be non-empty");
    if (goal.task_kind != TaskKind::qa || checker) {
        Checker c = checker.value_or(checker_for(goal.task_kind));
        try {
            require_gold(c, gold);
        } catch (const ConfigError&) {
            std::string field = std::string("gold.") + gold_field(c);
            throw FieldError(field, "task field '" + field + "' is missing or invalid");
        }
    }
    if (goal.task_kind == TaskKind::crafting && !environment.contains("world")) {
        throw FieldError("environment.world", "task field 'environment.world' is required for crafting tasks");
    }
    if (manual_group) {
        try {
            agentkernel::manual_group(*manual_group);
        } catch (const ValidationError& e) {
            throw FieldError("manual_group", std::string("task field 'manual_group': ") + e.what());
        }
    }
}

// -- config ---------------------------------------------------------------------------------

std::filesystem::path HarnessConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
}

HarnessConfig HarnessConfig::load(const std::filesystem::path& file) {
    auto base = std::filesystem::absolute(file).parent_path();
    return from_json(read_json_file(file), base);
}

HarnessConfig HarnessConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    HarnessConfig cfg;
    cfg.base_dir = base_dir;
    try {
        const json providers = j.value("providers", json::object());
        for (const auto& [name, pj] : providers.items()) {
            cfg.providers[name] = parse_provider(name, pj, cfg);
        }
        cfg.default_provider =
            j.value("default_provider", cfg.providers.empty() ? std::string{} : cfg.providers.begin()->first);
        cfg.defaults = j.value("defaults", json::object());
        if (j.contains("sandbox")) {
            const json& s = j["sandbox"];
            cfg.sandbox.wall_clock = std::chrono::milliseconds(s.value("wall_clock_ms", 10'000));
            cfg.sandbox.memory_mb = s.value("memory_mb", std::size_t{512});
            cfg.sandbox.python = s.value("python", std::string("python3"));
        }
        auto add_task = [&](TaskSpec t) {
            if (cfg.tasks.count(t.id)) throw ConfigError("duplicate task id '" + t.id + "'");
            if (!t.suite.empty()) cfg.suites[t.suite].push_back(t.id);
            cfg.tasks.emplace(t.id, std::move(t));
        };
        for (const auto& path : j.value("suites", json::array())) {
            json suite = read_json_file(cfg.resolve(path.get<std::string>()));
            std::string name = suite.at("suite").get<std::string>();
            for (const auto& t : suite.at("tasks")) add_task(task_from_json(t, name));
        }
        for (const auto& t : j.value("tasks", json::array())) add_task(task_from_json(t));
        if (j.contains("prompts_dir")) cfg.prompts_dir = cfg.resolve(j["prompts_dir"].get<std::string>());
        cfg.store_dir = cfg.resolve(j.value("store_dir", std::string("runs")));
        cfg.corpus_dir = cfg.resolve(j.value("corpus", std::string("corpus")));
        cfg.parallelism = j.value("parallelism", 1);
        if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

const TaskSpec& HarnessConfig::task(const std::string& id) const {
    auto it = tasks.find(id);
    if (it == tasks.end()) throw NotFoundError("unknown task '" + id + "'");
    return it->second;
}

std::vector<const TaskSpec*> HarnessConfig::suite(const std::string& name) const {
    auto it = suites.find(name);
    if (it == suites.end()) throw NotFoundError("unknown suite '" + name + "'");
    std::vector<const TaskSpec*> out;
    for (const auto& id : it->second) out.push_back(&task(id));
    std::sort(out.begin(), out.end(), [](const TaskSpec* a, const TaskSpec* b) { return a->id < b->id; });
    return out;
}

const ProviderConfig& HarnessConfig::provider(const std::string& name) const {
    const std::string& key = name.empty() ? default_provider : name;
    auto it = providers.find(key);
    if (it == providers.end()) throw NotFoundError("unknown provider '" + key + "'");
    return it->second;
}

PromptLibrary HarnessConfig::prompts() const {
    return prompts_dir ? PromptLibrary::with_overrides(*prompts_dir) : PromptLibrary::builtin();
}

std::vector<std::string> HarnessConfig::check() const {
    std::vector<std::string> problems;
    if (providers.empty()) problems.push_back("no providers configured");
    else if (!providers.count(default_provider)) problems.push_back("default provider '" + default_provider + "' is not defined");
    for (const auto& [name, p] : providers) {
        if (p.type == "scripted" && !std::filesystem::is_regular_file(p.script)) {
            problems.push_back("provider '" + name + "': script " + p.script.string() + " not found");
        }
    }
    for (const auto& [id, t] : tasks) {
        try {
            t.validate();
            make_environment(t, *this);
        } catch (const std::exception& e) {
            problems.push_back("task '" + id + "': " + e.what());
        }
    }
    try {
        prompts();
    } catch (const std::exception& e) {
        problems.push_back(std::string("prompts: ") + e.what());
    }
    return problems;
}

// -- run construction -----------------------------------------------------------------------

RunConfig default_run_config(TaskKind kind) {
    RunConfig c;
    switch (kind) {
    case TaskKind::math:
        c.n_experts = 2;
        c.structure = Structure::vertical;
        break;
    case TaskKind::qa:
    case TaskKind::code:
    case TaskKind::constrained_generation:
        c.n_experts = 4;
        c.structure = Structure::vertical;
        break;
    case TaskKind::tool:
    case TaskKind::crafting:
        c.n_experts = 3;
        c.structure = Structure::horizontal;
        break;
    }
    return c;
}

EvaluatorKind default_evaluator(TaskKind kind) {
    switch (kind) {
    case TaskKind::code:
    case TaskKind::constrained_generation:
    case TaskKind::crafting: return EvaluatorKind::programmatic;
    default: return EvaluatorKind::agent;
    }
}

RunConfig resolve_run_config(const HarnessConfig& config, const TaskSpec& task, Setup setup) {
    RunConfig c = default_run_config(task.goal.task_kind);
    c.evaluator_kind = default_evaluator(task.goal.task_kind);
    if (config.defaults.contains("run")) from_json(config.defaults["run"], c);
    const std::string kind = to_string(task.goal.task_kind);
    if (config.defaults.contains("kinds") && config.defaults["kinds"].contains(kind)) {
        from_json(config.defaults["kinds"][kind], c);
    }
    if (task.evaluator) c.evaluator_kind = *task.evaluator;
    if (task.overrides.contains("all")) from_json(task.overrides["all"], c);
    if (task.overrides.contains(to_string(setup))) from_json(task.overrides[to_string(setup)], c);
    if (task.manual_group) c.n_experts = static_cast<int>(task.manual_group->size());
    c.setup = setup;
    if (setup != Setup::group) c.n_experts = 1;
    if (setup == Setup::cot) c.max_rounds = 1;
    c.validate();
    return c;
}

std::unique_ptr<Environment> make_environment(const TaskSpec& task, const HarnessConfig& config) {
    const json& env = task.environment;
    switch (env_kind_for(task.goal.task_kind)) {
    case EnvKind::answer: {
        std::vector<std::string> concepts;
        if (task.goal.task_kind == TaskKind::constrained_generation && task.gold.concepts) concepts = *task.gold.concepts;
        return std::make_unique<AnswerEnvironment>(std::move(concepts));
    }
    case EnvKind::code:
        return std::make_unique<CodeEnvironment>(task.gold.tests.value_or(""), config.sandbox,
                                                 env.value("agent_tests", false));
    case EnvKind::tool: {
        auto corpus = env.contains("corpus") ? config.resolve(env["corpus"].get<std::string>()) : config.corpus_dir;
        return std::make_unique<ToolEnvironment>(default_tools(corpus, config.sandbox),
                                                 env.value("max_steps", default_react_steps));
    }
    case EnvKind::crafting: {
        if (!env.contains("world")) throw ConfigError("crafting task '" + task.id + "' has no world");
        const json& w = env["world"];
        json fixture = w.is_string() ? read_json_file(config.resolve(w.get<std::string>())) : w;
        return std::make_unique<CraftingEnvironment>(crafting::World::from_fixture(fixture),
                                                     env.value("attempt_cap", crafting::default_attempt_cap));
    }
    }
    throw ConfigError("unknown environment kind");
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& provider, const std::string& task_id, Setup setup) {
    if (provider.type == "openai") {
        return std::make_shared<OpenAICompatibleProvider>(
            provider.openai, make_http_transport(provider.openai.base_url, provider.openai.timeout));
    }
    json script = read_json_file(provider.script);
    if (script.is_object() && script.contains("tasks")) {
        const json& tasks = script["tasks"];
        if (!tasks.contains(task_id)) {
            throw ConfigError("script " + provider.script.string() + " has no entries for task '" + task_id + "'");
        }
        const json& per_task = tasks[task_id];
        if (per_task.is_array()) return ScriptedProvider::from_json(per_task);
        const std::string key = to_string(setup);
        if (per_task.contains(key)) return ScriptedProvider::from_json(per_task[key]);
        if (per_task.contains("*")) return ScriptedProvider::from_json(per_task["*"]);
        throw ConfigError("script has no entries for task '" + task_id + "' under setup " + key);
    }
    return ScriptedProvider::from_json(script);
}

std::unique_ptr<Run> prepare_run(const HarnessConfig& config, const TaskSpec& task, const RunRequest& request) {
    task.validate();
    RunConfig rc = resolve_run_config(config, task, request.setup);
    if (request.evaluator) rc.evaluator_kind = *request.evaluator;

    std::shared_ptr<Provider> provider;
    ClientOptions options;
    if (request.script) {
        provider = ScriptedProvider::from_json(*request.script);
        rc.provider_ref = "inline-script";
    } else {
        const ProviderConfig& pc = config.provider(request.provider);
        provider = make_provider(pc, task.id, request.setup);
        options = pc.options;
        rc.provider_ref = pc.name;
    }

    EvaluationSetup evaluation;
    evaluation.template_id = task.evaluator_template.value_or("evaluator");
    evaluation.checker = task.checker;
    evaluation.gold = task.gold;
    evaluation.human = request.human;

    RunDependencies deps{LlmClient(provider, options), config.prompts(), evaluation, std::nullopt, request.sink};
    if (task.manual_group) deps.manual_group = manual_group(*task.manual_group);
    std::string run_id = request.run_id.empty() ? task.id + "-" + to_string(request.setup) : request.run_id;
    return std::make_unique<Run>(run_id, rc, task.goal, make_environment(task, config), std::move(deps));
}

// -- scoring --------------------------------------------------------------------------------

void to_json(json& j, const TaskOutcome& o) {
    j = json{{"task_id", o.task_id}, {"run_id", o.run_id}, {"status", o.status},
             {"rounds", o.rounds},   {"score", o.score},   {"error", o.error}};
}

void from_json(const json& j, TaskOutcome& o) {
    o.task_id = j.at("task_id").get<std::string>();
    o.run_id = j.at("run_id").get<std::string>();
    o.status = j.at("status").get<RunStatus>();
    o.rounds = j.at("rounds").get<int>();
    o.score = j.at("score").get<double>();
    o.error = j.value("error", std::string{});
}

std::string metric_name(TaskKind kind) {
    switch (kind) {
    case TaskKind::math:
    case TaskKind::tool: return "accuracy";
    case TaskKind::code: return "pass_rate";
    case TaskKind::constrained_generation: return "coverage";
    case TaskKind::crafting: return "success";
    case TaskKind::qa: return "judged";
    }
    return "score";
}

double score_run(const TaskSpec& task, const RunRecord& record) {
    if (record.status == RunStatus::aborted) return 0.0;
    if (task.goal.task_kind == TaskKind::qa && !task.checker) return record.status == RunStatus::solved ? 1.0 : 0.0;
    const json* state = nullptr;
    for (auto it = record.rounds.rbegin(); it != record.rounds.rend(); ++it) {
        if (it->state) {
            state = &*it->state;
            break;
        }
    }
    if (!state) return 0.0;
    Checker checker = task.checker.value_or(checker_for(task.goal.task_kind));
    Verdict v = evaluate_programmatic(*state, task.goal, checker, task.gold);
    if (checker == Checker::full_coverage) return v.score.value_or(v.solved ? 1.0 : 0.0);
    return v.solved ? 1.0 : 0.0;
}

double aggregate_score(const std::vector<TaskOutcome>& outcomes) {
    if (outcomes.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& o : outcomes) sum += o.score;
    return sum / static_cast<double>(outcomes.size());
}

void to_json(json& j, const SuiteResult& r) {
    j = json{{"suite", r.suite},       {"setup", r.setup},         {"metric", r.metric},
             {"outcomes", r.outcomes}, {"aggregate", r.aggregate}};
}

void from_json(const json& j, SuiteResult& r) {
    r.suite = j.at("suite").get<std::string>();
    r.setup = parse_enum<Setup>(j.at("setup").get<std::string>(), "setup");
    r.metric = j.at("metric").get<std::string>();
    r.outcomes = j.at("outcomes").get<std::vector<TaskOutcome>>();
    r.aggregate = j.at("aggregate").get<double>();
}

SuiteResult run_benchmark(const HarnessConfig& config, const std::string& suite, Setup setup,
                          const std::string& provider, TranscriptStore* store) {
    auto tasks = config.suite(suite);
    SuiteResult result;
    result.suite = suite;
    result.setup = setup;
    std::set<std::string> metrics;
    for (const auto* t : tasks) metrics.insert(metric_name(t->goal.task_kind));
    result.metric = metrics.size() == 1 ? *metrics.begin() : "score";
    result.outcomes.resize(tasks.size());

    auto run_one = [&](std::size_t i) {
        const TaskSpec& task = *tasks[i];
        TaskOutcome& o = result.outcomes[i];
        o.task_id = task.id;
        o.run_id = task.id + "-" + to_string(setup);
        try {
            RunRequest request;
            request.run_id = o.run_id;
            request.setup = setup;
            request.provider = provider;
            if (store) request.sink = [store, id = o.run_id](const StageEvent& e) { store->append(id, e); };
            auto run = prepare_run(config, task, request);
            const RunRecord& record = run->start();
            o.status = record.status;
            o.rounds = static_cast<int>(record.rounds.size());
            o.score = score_run(task, record);
            if (record.status == RunStatus::aborted) o.error = record.abort_cause.value_or("aborted");
            if (record.status == RunStatus::awaiting_human) {
                o.error = "awaiting a human verdict";
                o.score = 0.0;
            }
        } catch (const std::exception& e) {
            o.status = RunStatus::aborted;
            o.score = 0.0;
            o.error = e.what();
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) run_one(i);
    };
    std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), tasks.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    result.aggregate = aggregate_score(result.outcomes);
    return result;
}

// -- comparison -----------------------------------------------------------------------------

Comparison compare_setups(const std::vector<SuiteResult>& results) {
    if (results.empty()) throw ValidationError("no results to compare");
    Comparison c;
    c.suite = results.front().suite;
    c.metric = results.front().metric;
    for (const auto& o : results.front().outcomes) c.tasks.push_back(o.task_id);
    std::vector<std::string> sorted_tasks = c.tasks;
    std::sort(sorted_tasks.begin(), sorted_tasks.end());
    for (const auto& r : results) {
        if (r.suite != c.suite) throw ValidationError("results come from different suites: " + c.suite + ", " + r.suite);
        std::vector<std::string> ids;
        for (const auto& o : r.outcomes) ids.push_back(o.task_id);
        std::sort(ids.begin(), ids.end());
        if (ids != sorted_tasks) throw ValidationError("results for suite " + c.suite + " cover different tasks");
        c.setups.push_back(to_string(r.setup));
        c.aggregates.push_back(aggregate_score(r.outcomes));
    }
    std::sort(c.tasks.begin(), c.tasks.end());
    for (const auto& task : c.tasks) {
        std::vector<double> row;
        for (const auto& r : results) {
            auto it = std::find_if(r.outcomes.begin(), r.outcomes.end(),
                                   [&](const TaskOutcome& o) { return o.task_id == task; });
            row.push_back(it->score);
        }
        c.cells.push_back(std::move(row));
    }
    return c;
}

json Comparison::to_json() const {
    json rows = json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        json cells_j = json::object();
        for (std::size_t k = 0; k < setups.size(); ++k) cells_j[setups[k]] = cells[i][k];
        rows.push_back({{"task", tasks[i]}, {"scores", cells_j}});
    }
    json agg = json::object();
    for (std::size_t k = 0; k < setups.size(); ++k) agg[setups[k]] = aggregates[k];
    return json{{"suite", suite}, {"metric", metric}, {"setups", setups}, {"rows", rows}, {"aggregate", agg}};
}

std::string Comparison::to_text() const {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };
    std::size_t first = std::max<std::size_t>(9, metric.size() + 2);
    for (const auto& t : tasks) first = std::max(first, t.size());
    std::vector<std::size_t> widths;
    for (const auto& s : setups) widths.push_back(std::max<std::size_t>(s.size(), 5));

    auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };
    auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - std::min(w, s.size()), ' ') + s; };

    std::string out = pad_right("task", first);
    for (std::size_t k = 0; k < setups.size(); ++k) out += "  " + pad_left(setups[k], widths[k]);
    out += "\n";
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        out += pad_right(tasks[i], first);
        for (std::size_t k = 0; k < setups.size(); ++k) out += "  " + pad_left(fmt(cells[i][k]), widths[k]);
        out += "\n";
    }
    out += pad_right(metric, first);
    for (std::size_t k = 0; k < setups.size(); ++k) out += "  " + pad_left(fmt(aggregates[k]), widths[k]);
    out += "\n";
    return out;
}

RunRecord replay(const TranscriptStore& store, const std::string& run_id) { return fold_events(store.load(run_id)); }

} // namespace agentkernel
