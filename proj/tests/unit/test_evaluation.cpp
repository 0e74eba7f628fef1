#include <doctest.h>

#include <random>
#include <sstream>

#include "agentkernel/crafting.hpp"
#include "agentkernel/evaluation.hpp"
#include "agentkernel/text.hpp"
#include "protocol_checks.hpp"
#include "test_support.hpp"

using namespace agentkernel;
using testing::client;
using testing::scripted;

namespace {

const Goal math_goal{"What is 6 * 7?", TaskKind::math};

GoldData answer_gold(std::string a) {
    GoldData g;
    g.answer = std::move(a);
    return g;
}

/// Scripted feedback source; nullopt entries model "nothing yet".
struct QueueSource : FeedbackSource {
    std::vector<std::optional<Verdict>> replies;
    std::size_t asked = 0;
    std::optional<Verdict> request(const std::string&, const Goal&) override {
        return asked < replies.size() ? replies[asked++] : std::nullopt;
    }
};

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("verdict grammar") {
    auto s = parse_verdict("SOLVED\nlooks right");
    REQUIRE(s);
    CHECK(s->solved);
    CHECK(s->feedback == "looks right");

    auto u = parse_verdict("  UNSOLVED  \n check step 2 ");
    REQUIRE(u);
    CHECK_FALSE(u->solved);
    CHECK(u->feedback == "check step 2");

    auto bare = parse_verdict("UNSOLVED");
    REQUIRE(bare);
    CHECK_FALSE(bare->feedback.empty());

    CHECK_FALSE(parse_verdict("solved"));
    CHECK_FALSE(parse_verdict("The answer is SOLVED"));
    CHECK_FALSE(parse_verdict(""));
}

TEST_CASE("an evaluator that answers garbage twice rejects with the raw text") {
    auto p = scripted({{"Evaluator", "hmm, maybe?"}, {"Evaluator", "I think it is mostly fine"}});
    Verdict v = evaluate_agent("42", math_goal, client(p), PromptLibrary::builtin());
    CHECK_FALSE(v.solved);
    CHECK(v.feedback == "I think it is mostly fine");
    REQUIRE(p->calls().size() == 2);
    CHECK(testing::joined(p->calls()[1].messages).find("SOLVED or UNSOLVED") != std::string::npos);
}

TEST_CASE("the evaluator prompt carries the goal and the state") {
    auto p = scripted({{"Evaluator", "SOLVED"}});
    Verdict v = evaluate_agent("The answer is 42", math_goal, client(p), PromptLibrary::builtin());
    CHECK(v.solved);
    auto prompt = testing::joined(p->calls()[0].messages);
    CHECK(prompt.find("What is 6 * 7?") != std::string::npos);
    CHECK(prompt.find("The answer is 42") != std::string::npos);
}

TEST_CASE("property: every evaluator reply yields a valid verdict") {
    std::mt19937_64 rng(71);
    const std::vector<std::string> heads{"SOLVED", "UNSOLVED", "solved", "", "   ", "Verdict: SOLVED", "UNSOLVED ",
                                         "maybe"};
    const std::vector<std::string> bodies{"", "\n", "\nfix it", "\n\n  \n", "\nall good"};
    for (int i = 0; i < 300; ++i) {
        auto reply = [&] { return heads[rng() % heads.size()] + bodies[rng() % bodies.size()]; };
        std::string first = reply(), second = reply();
        auto p = scripted({{"Evaluator", first}, {"Evaluator", second}});
        Verdict v = evaluate_agent("state", math_goal, client(p), PromptLibrary::builtin());
        CHECK_NOTHROW(v.validate());
        // Solved only when a reply literally says so on its first line.
        auto first_line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
        bool says_solved = agentkernel::text::trim(first_line(first)) == "SOLVED" ||
                           (!parse_verdict(first) && agentkernel::text::trim(first_line(second)) == "SOLVED");
        CHECK(v.solved == says_solved);
    }
}

TEST_CASE("numeric checker reads the last number") {
    json state{{"answer", "6 * 7 = 42, so the result is 42"}};
    Verdict ok = evaluate_programmatic(state, math_goal, Checker::exact_numeric, answer_gold("42"));
    CHECK(ok.solved);
    CHECK(ok.score == 1.0);

    Verdict bad = evaluate_programmatic(json{{"answer", "I get 41"}}, math_goal, Checker::exact_numeric,
                                        answer_gold("42"));
    CHECK_FALSE(bad.solved);
    CHECK(bad.feedback.find("41") != std::string::npos);
    CHECK_FALSE(evaluate_programmatic(json{{"answer", "no idea"}}, math_goal, Checker::exact_numeric,
                                      answer_gold("42"))
                    .solved);
    CHECK_FALSE(evaluate_programmatic(json::object(), math_goal, Checker::exact_numeric, answer_gold("42")).solved);
}

TEST_CASE("last-number extraction") {
    CHECK(extract_last_number("so the result is 42") == 42.0);
    CHECK(extract_last_number("from 3 to -7.5.") == -7.5);
    CHECK(extract_last_number("total 12,400 residents") == 12400.0);
    CHECK(extract_last_number("list: 1, 2") == 2.0);
    CHECK(extract_last_number("item-3") == 3.0);
    CHECK_FALSE(extract_last_number("none"));
}

TEST_CASE("property: extraction agrees with the generated final literal") {
    std::mt19937_64 rng(8);
    const std::vector<std::string> words{"the", "answer", "is", "so", "total", "=", "about", "x"};
    for (int i = 0; i < 300; ++i) {
        std::string text;
        std::optional<double> last;
        int n = testing::uniform(rng, 1, 10);
        for (int k = 0; k < n; ++k) {
            if (testing::chance(rng, 0.4)) {
                long long whole = testing::uniform(rng, 0, 99999);
                bool neg = testing::chance(rng, 0.3);
                bool frac = testing::chance(rng, 0.3);
                int decimals = testing::uniform(rng, 1, 99);
                std::ostringstream lit;
                lit << (neg ? "-" : "") << whole;
                if (frac) lit << "." << decimals;
                double v = static_cast<double>(whole) + (frac ? std::stod("0." + std::to_string(decimals)) : 0.0);
                last = neg ? -v : v;
                text += lit.str();
            } else {
                text += words[rng() % words.size()];
            }
            text += testing::chance(rng, 0.2) ? ". " : " ";
        }
        CAPTURE(text);
        auto got = extract_last_number(text);
        REQUIRE(got.has_value() == last.has_value());
        if (last) CHECK(*got == doctest::Approx(*last));
    }
}

TEST_CASE("test checker names every failure") {
    TestReport r;
    r.total = 5;
    r.passed = 3;
    r.failures = {{"test_empty", "expected []"}, {"test_negative", "wrong sign"}};
    Goal g{"write sort", TaskKind::code};
    GoldData gold;
    gold.tests = "...";
    Verdict v = evaluate_programmatic(json{{"report", r}}, g, Checker::all_tests_pass, gold);
    CHECK_FALSE(v.solved);
    CHECK(v.score == doctest::Approx(0.6));
    CHECK(v.feedback.find("2 of 5") != std::string::npos);
    CHECK(v.feedback.find("test_empty") != std::string::npos);
    CHECK(v.feedback.find("test_negative") != std::string::npos);

    r.passed = 5;
    r.failures.clear();
    CHECK(evaluate_programmatic(json{{"report", r}}, g, Checker::all_tests_pass, gold).solved);
    CHECK_FALSE(evaluate_programmatic(json{{"error", "no code"}}, g, Checker::all_tests_pass, gold).solved);
    CHECK_FALSE(evaluate_programmatic(json{{"report", TestReport{}}}, g, Checker::all_tests_pass, gold).solved);
}

TEST_CASE("coverage checker lists the missing concepts") {
    GoldData gold;
    gold.concepts = std::vector<std::string>{"dog", "frisbee", "catch"};
    Goal g{"write a sentence", TaskKind::constrained_generation};
    Verdict v = evaluate_programmatic(json{{"answer", "A dog catches it."}}, g, Checker::full_coverage, gold);
    CHECK_FALSE(v.solved);
    CHECK(v.feedback == "Missing concepts: frisbee");
    CHECK(v.score == doctest::Approx(2.0 / 3.0));
    CHECK(evaluate_programmatic(json{{"answer", "A dog catches a frisbee."}}, g, Checker::full_coverage, gold).solved);
}

TEST_CASE("crafting checker: one bookshelf held by any agent solves it") {
    crafting::World w(3, 1);
    w.add_agent({"Alice", {0, 0}, {}});
    w.add_agent({"Bob", {1, 0}, {{"bookshelf", 1}}});
    GoldData gold;
    gold.target = CraftTarget{"bookshelf", 1};
    Goal g{"craft a bookshelf", TaskKind::crafting};
    Verdict v = evaluate_programmatic(json{{"world", w.to_json()}, {"results", json::array()}}, g,
                                      Checker::crafting_goal, gold);
    CHECK(v.solved);
    CHECK(v.feedback.find("Bob") != std::string::npos);

    gold.target->count = 2;
    json results = json::array({{{"agent", "Alice"},
                                 {"assignment", "craft 1 book"},
                                 {"subgoals", json::array({{{"text", "craft 1 book"},
                                                            {"completed", false},
                                                            {"attempts", 5},
                                                            {"reason", "missing leather"}}})}}});
    Verdict miss = evaluate_programmatic(json{{"world", w.to_json()}, {"results", results}}, g,
                                         Checker::crafting_goal, gold);
    CHECK_FALSE(miss.solved);
    CHECK(miss.feedback.find("Alice: craft 1 book failed (missing leather)") != std::string::npos);
    CHECK(miss.feedback.find("Bob has 1 bookshelf") != std::string::npos);
}

TEST_CASE("gold data is required per checker") {
    CHECK_THROWS_WITH_AS(require_gold(Checker::exact_numeric, GoldData{}), doctest::Contains("'answer'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(require_gold(Checker::all_tests_pass, GoldData{}), doctest::Contains("'tests'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(require_gold(Checker::full_coverage, GoldData{}), doctest::Contains("'concepts'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(require_gold(Checker::crafting_goal, GoldData{}), doctest::Contains("'target'"),
                         ConfigError);
    CHECK_THROWS_AS(require_gold(Checker::exact_numeric, answer_gold("unknown")), ConfigError);
    CHECK_NOTHROW(require_gold(Checker::exact_numeric, answer_gold("42")));
    CHECK(checker_for(TaskKind::math) == Checker::exact_numeric);
    CHECK(checker_for(TaskKind::crafting) == Checker::crafting_goal);
    CHECK_THROWS_AS(checker_for(TaskKind::qa), ConfigError);
}

TEST_CASE("gold data round-trips through JSON") {
    GoldData g;
    g.answer = "42";
    g.concepts = std::vector<std::string>{"a", "b"};
    g.target = CraftTarget{"book", 2};
    CHECK(json(g).get<GoldData>() == g);
    CHECK(json{{"answer", 42}}.get<GoldData>().answer == "42");
}

TEST_CASE("terminal feedback: accept") {
    std::istringstream in("y\n");
    std::ostringstream out;
    TerminalFeedbackSource src(in, out);
    auto v = src.request("42", math_goal);
    REQUIRE(v);
    CHECK(v->solved);
    CHECK(out.str().find("What is 6 * 7?") != std::string::npos);
}

TEST_CASE("terminal feedback: empty feedback is re-prompted") {
    std::istringstream in("maybe\nn\n\n   \nadd tests\n");
    std::ostringstream out;
    TerminalFeedbackSource src(in, out);
    auto v = src.request("42", math_goal);
    REQUIRE(v);
    CHECK_FALSE(v->solved);
    CHECK(v->feedback == "add tests");
    CHECK(out.str().find("A rejection needs feedback.") != std::string::npos);
}

TEST_CASE("terminal feedback: end of input means no verdict yet") {
    std::istringstream in("n\n");
    std::ostringstream out;
    TerminalFeedbackSource src(in, out);
    CHECK_FALSE(src.request("42", math_goal));
}

TEST_CASE("human evaluation skips invalid verdicts and pauses without input") {
    CHECK_FALSE(evaluate_human("s", math_goal, nullptr));

    QueueSource q;
    Verdict invalid;
    invalid.solved = false;
    q.replies = {invalid, Verdict::reject("use smaller steps")};
    auto v = evaluate_human("s", math_goal, &q);
    REQUIRE(v);
    CHECK(v->feedback == "use smaller steps");
    CHECK(q.asked == 2);

    QueueSource empty;
    CHECK_FALSE(evaluate_human("s", math_goal, &empty));

    QueueSource stubborn;
    stubborn.replies.assign(10, invalid);
    CHECK_THROWS_AS(evaluate_human("s", math_goal, &stubborn), ValidationError);
}

}
