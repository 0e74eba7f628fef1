#include <doctest.h>

#include <fstream>
#include <thread>

#include "agentkernel/kernel.hpp"
#include "test_support.hpp"

using namespace agentkernel;
using testing::Script;

namespace {

const Goal math_goal{"What is 6 * 7?", TaskKind::math};

RunConfig two_experts(int max_rounds = 3) {
    RunConfig c;
    c.n_experts = 2;
    c.max_rounds = max_rounds;
    return c;
}

/// One vertical round: recruit two experts, the solver proposes, the reviewer approves, and the
/// evaluator replies with `verdict`.
void add_round(Script& s, const std::string& answer, const std::string& verdict) {
    s.push_back({"Recruiter", "1. Mathematician: expert in algebra\n2. Verifier: checks steps"});
    s.push_back({"Mathematician", answer});
    s.push_back({"Verifier", "APPROVE\nfine"});
    s.push_back({"Evaluator", verdict});
}

std::unique_ptr<Environment> answer_env() { return std::make_unique<AnswerEnvironment>(); }

RunRecord run_script(const Script& s, RunConfig config = two_experts(), const std::string& id = "r1") {
    return run_pipeline(id, config, math_goal, answer_env(), testing::deps_for(testing::scripted(s)));
}

std::vector<Stage> stages_of(const RunRecord& r, int round) {
    std::vector<Stage> out;
    for (const auto& e : r.events) {
        if (e.round == round) out.push_back(e.stage);
    }
    return out;
}

StageEvent event(long long seq, int round, Stage stage, const std::string& kind, json payload = json::object()) {
    StageEvent e;
    e.seq = seq;
    e.round = round;
    e.stage = stage;
    e.kind = kind;
    e.payload = std::move(payload);
    e.timestamp = testing::fixed_clock();
    return e;
}

} // namespace

TEST_SUITE("kernel") {

TEST_CASE("solved in the first round") {
    Script s;
    add_round(s, "6 * 7 = 42", "SOLVED\ncorrect");
    auto r = run_script(s);
    CHECK(r.status == RunStatus::solved);
    REQUIRE(r.rounds.size() == 1);
    CHECK_FALSE(r.rounds[0].feedback_in);
    CHECK(r.rounds[0].recruitment->profiles.size() == 2);
    CHECK(r.rounds[0].decision->decision.decision_text == "6 * 7 = 42");
    CHECK(r.rounds[0].state->at("answer") == "6 * 7 = 42");
    CHECK(r.rounds[0].verdict->solved);
    CHECK(r.events.front().kind == event_kind::run_started);
    CHECK(r.events.back().kind == event_kind::run_finished);
}

TEST_CASE("evaluator feedback reaches the next round's recruiter") {
    Script s;
    add_round(s, "41", "UNSOLVED\nF1");
    add_round(s, "42", "SOLVED");
    auto provider = testing::scripted(s);
    auto r = run_pipeline("r", two_experts(), math_goal, answer_env(), testing::deps_for(provider));
    CHECK(r.status == RunStatus::solved);
    REQUIRE(r.rounds.size() == 2);
    CHECK(r.rounds[1].feedback_in == "F1");
    auto recruiter = testing::prompts_to(*provider, "Recruiter");
    REQUIRE(recruiter.size() == 2);
    CHECK(recruiter[0].find("F1") == std::string::npos);
    CHECK(recruiter[1].find("F1") != std::string::npos);
}

TEST_CASE("the round cap ends the run unsolved") {
    Script s;
    for (int i = 0; i < 3; ++i) add_round(s, "41", "UNSOLVED\nstill wrong " + std::to_string(i));
    auto r = run_script(s);
    CHECK(r.status == RunStatus::unsolved);
    CHECK(r.rounds.size() == 3);
    CHECK(r.rounds[2].feedback_in == "still wrong 1");
}

TEST_CASE("a human evaluator without a verdict pauses the run") {
    RunConfig c = two_experts(2);
    c.evaluator_kind = EvaluatorKind::human;

    SUBCASE("accepting resumes into solved") {
        Script s;
        s.push_back({"Recruiter", "1. Mathematician: expert in algebra\n2. Verifier: checks steps"});
        s.push_back({"Mathematician", "42"});
        s.push_back({"Verifier", "APPROVE"});
        Run run("h1", c, math_goal, answer_env(), testing::deps_for(testing::scripted(s)));
        CHECK(run.start().status == RunStatus::awaiting_human);
        CHECK(run.record().events.back().kind == event_kind::awaiting_human);
        CHECK(resume_run(run, Verdict::accept("good")).status == RunStatus::solved);
        CHECK(run.record().rounds.size() == 1);
        CHECK_THROWS_AS(run.resume(Verdict::accept()), StateConflictError);
    }

    SUBCASE("rejecting threads the human feedback into the next round") {
        Script s;
        for (int i = 0; i < 2; ++i) {
            s.push_back({"Recruiter", "1. Mathematician: expert in algebra\n2. Verifier: checks steps"});
            s.push_back({"Mathematician", "41"});
            s.push_back({"Verifier", "APPROVE"});
        }
        auto provider = testing::scripted(s);
        Run run("h2", c, math_goal, answer_env(), testing::deps_for(provider));
        run.start();
        CHECK_THROWS_AS(run.resume(Verdict{false, std::nullopt, "  "}), ValidationError);
        CHECK(run.record().status == RunStatus::awaiting_human);
        CHECK(run.resume(Verdict::reject("add tests")).status == RunStatus::awaiting_human);
        CHECK(run.record().rounds[1].feedback_in == "add tests");
        CHECK(testing::prompts_to(*provider, "Recruiter")[1].find("add tests") != std::string::npos);
        // The second rejection hits the round cap.
        CHECK(run.resume(Verdict::reject("still not right")).status == RunStatus::unsolved);
        CHECK(run.record().rounds.size() == 2);
    }
}

TEST_CASE("a run starts once") {
    Script s;
    add_round(s, "42", "SOLVED");
    Run run("once", two_experts(), math_goal, answer_env(), testing::deps_for(testing::scripted(s)));
    run.start();
    CHECK_THROWS_AS(run.start(), StateConflictError);
    CHECK_THROWS_AS(run.resume(Verdict::accept()), StateConflictError);
}

TEST_CASE("stages run in order within each round") {
    Script s;
    add_round(s, "41", "UNSOLVED\nF1");
    add_round(s, "42", "SOLVED");
    auto r = run_script(s);
    for (int round = 0; round < 2; ++round) {
        auto stages = stages_of(r, round);
        CHECK(std::is_sorted(stages.begin(), stages.end()));
        CHECK(stages.front() == Stage::recruit);
        CHECK(stages.back() == Stage::evaluate);
    }
    for (std::size_t i = 0; i < r.events.size(); ++i) CHECK(r.events[i].seq == static_cast<long long>(i));
}

TEST_CASE("identical scripts give identical transcripts") {
    Script s;
    add_round(s, "41", "UNSOLVED\nF1");
    add_round(s, "42", "SOLVED");
    auto a = run_script(s, two_experts(), "same");
    auto b = run_script(s, two_experts(), "same");
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(canonical_line(a.events[i]) == canonical_line(b.events[i]));
    }
    CHECK(record_summary(a) == record_summary(b));
    CHECK(record_summary(fold_events(a.events)) == record_summary(a));
}

TEST_CASE("script exhaustion aborts with the cause") {
    Script s;
    s.push_back({"Recruiter", "1. Mathematician: expert in algebra\n2. Verifier: checks steps"});
    s.push_back({"Mathematician", "42"});
    auto r = run_script(s);
    CHECK(r.status == RunStatus::aborted);
    REQUIRE(r.abort_cause);
    CHECK(r.abort_cause->find("script_exhausted") != std::string::npos);
    CHECK(r.abort_cause->find("Verifier") != std::string::npos);
    CHECK(r.events.back().stage == Stage::decide);
}

TEST_CASE("solo and chain-of-thought setups") {
    SUBCASE("solo recruits a single expert who decides alone") {
        RunConfig c = two_experts();
        c.setup = Setup::solo;
        c.n_experts = 1;
        Script s{{"Recruiter", "1. Mathematician: expert in algebra"},
                 {"Mathematician", "42"},
                 {"Evaluator", "SOLVED"}};
        auto r = run_script(s, c);
        CHECK(r.status == RunStatus::solved);
    }
    SUBCASE("cot is a single unevaluated call") {
        RunConfig c = two_experts(1);
        c.setup = Setup::cot;
        auto provider = testing::scripted({{"Assistant", "Step by step: 42"}});
        auto r = run_pipeline("cot", c, math_goal, answer_env(), testing::deps_for(provider));
        CHECK(r.status == RunStatus::unsolved);
        CHECK(provider->calls().size() == 1);
        CHECK(r.rounds[0].state->at("answer") == "Step by step: 42");
        CHECK_FALSE(r.rounds[0].verdict);
    }
}

TEST_CASE("invalid runs are rejected up front") {
    auto deps = [] { return testing::deps_for(testing::scripted({})); };
    CHECK_THROWS_AS(Run("x", two_experts(), Goal{"", TaskKind::math}, answer_env(), deps()), ValidationError);
    CHECK_THROWS_AS(Run("x", two_experts(), math_goal, std::make_unique<CodeEnvironment>(""), deps()), ConfigError);
    RunConfig bad = two_experts();
    bad.max_rounds = 0;
    CHECK_THROWS_AS(Run("x", bad, math_goal, answer_env(), deps()), ConfigError);
    RunConfig prog = two_experts();
    prog.evaluator_kind = EvaluatorKind::programmatic;
    CHECK_THROWS_AS(Run("x", prog, math_goal, answer_env(), deps()), ConfigError);
    CHECK_THROWS_AS(Run("", two_experts(), math_goal, answer_env(), deps()), ConfigError);
}

TEST_CASE("the sink sees every event in order") {
    Script s;
    add_round(s, "42", "SOLVED");
    std::vector<long long> seen;
    auto deps = testing::deps_for(testing::scripted(s));
    deps.sink = [&](const StageEvent& e) { seen.push_back(e.seq); };
    auto r = run_pipeline("sink", two_experts(), math_goal, answer_env(), std::move(deps));
    REQUIRE(seen.size() == r.events.size());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == static_cast<long long>(i));
}

}

TEST_SUITE("events") {

TEST_CASE("the reducer rejects gaps and stage regressions") {
    Script s;
    add_round(s, "42", "SOLVED");
    auto r = run_script(s);

    auto gap = r.events;
    gap.erase(gap.begin() + 2);
    CHECK_THROWS_AS(fold_events(gap), IntegrityError);

    CHECK_THROWS_AS(fold_events({r.events[0], event(1, 0, Stage::decide, event_kind::llm_call),
                                 event(2, 0, Stage::recruit, event_kind::llm_call)}),
                    IntegrityError);
    CHECK_THROWS_AS(fold_events({r.events[0], event(1, 1, Stage::recruit, event_kind::llm_call),
                                 event(2, 0, Stage::evaluate, event_kind::llm_call)}),
                    IntegrityError);

    CHECK_THROWS_AS(fold_events({event(0, 0, Stage::recruit, event_kind::round_started)}), IntegrityError);
    CHECK_THROWS_AS(fold_events({r.events[0], event(1, 0, Stage::decide, event_kind::decision, json{{"x", 1}})}),
                    IntegrityError);
}

TEST_CASE("transcripts round-trip and gaps are reported with the expected sequence number") {
    testing::TempDir dir;
    TranscriptStore store(dir.path);
    Script s;
    add_round(s, "42", "SOLVED");
    auto r = run_script(s, two_experts(), "t1");
    for (const auto& e : r.events) store.append("t1", e);
    CHECK(store.contains("t1"));
    CHECK(store.list() == std::vector<std::string>{"t1"});
    auto loaded = store.load("t1");
    REQUIRE(loaded.size() == r.events.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) CHECK(canonical_line(loaded[i]) == canonical_line(r.events[i]));
    CHECK(record_summary(fold_events(loaded)) == record_summary(r));

    // Drop line 3 (seq 2).
    std::vector<std::string> lines;
    {
        std::ifstream in(store.path_for("t1"));
        for (std::string l; std::getline(in, l);) lines.push_back(l);
    }
    lines.erase(lines.begin() + 2);
    {
        std::ofstream out(store.path_for("t1"), std::ios::trunc);
        for (const auto& l : lines) out << l << "\n";
    }
    try {
        store.load("t1");
        FAIL("expected IntegrityError");
    } catch (const IntegrityError& e) {
        CHECK(e.seq() == 2);
    }
    CHECK_THROWS_AS(store.load("missing"), NotFoundError);
    CHECK_THROWS_AS(store.path_for("../escape"), ValidationError);
}

TEST_CASE("canonical lines sort keys and can omit timestamps") {
    StageEvent e = event(0, 0, Stage::recruit, event_kind::run_started, json{{"b", 1}, {"a", 2}});
    auto line = canonical_line(e, false);
    CHECK(line.find("timestamp") == std::string::npos);
    CHECK(line.find(R"("a":2,"b":1)") != std::string::npos);
    CHECK(json::parse(canonical_line(e)).get<StageEvent>().timestamp == testing::fixed_clock());
}

TEST_CASE("event log readers block until data or close") {
    EventLog log;
    CHECK(log.read_from(0, std::chrono::milliseconds(10)).empty());
    std::vector<StageEvent> got;
    std::thread reader([&] { got = log.read_from(0, std::chrono::seconds(5)); });
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    log.append(event(0, 0, Stage::recruit, event_kind::run_started));
    reader.join();
    REQUIRE(got.size() == 1);

    log.append(event(1, 0, Stage::recruit, event_kind::round_started));
    CHECK(log.read_from(1, std::chrono::milliseconds(0)).size() == 1);
    CHECK(log.size() == 2);

    std::thread waiter([&] { got = log.read_from(2, std::chrono::seconds(5)); });
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    auto before = std::chrono::steady_clock::now();
    log.close();
    waiter.join();
    CHECK(got.empty());
    CHECK(log.closed());
    CHECK(std::chrono::steady_clock::now() - before < std::chrono::seconds(1));
}

}
