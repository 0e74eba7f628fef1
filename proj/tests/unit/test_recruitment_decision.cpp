#include <doctest.h>

#include <random>

#include "agentkernel/decision.hpp"
#include "agentkernel/error.hpp"
#include "agentkernel/recruitment.hpp"
#include "protocol_checks.hpp"
#include "test_support.hpp"

using namespace agentkernel;
using testing::client;
using testing::scripted;

namespace {

const Goal math_goal{"What is 6 * 7?", TaskKind::math};

}

TEST_SUITE("recruitment") {

TEST_CASE("numbered expert list parses into profiles") {
    auto p = scripted({{"Recruiter", "1. Mathematician: expert in algebra\n2. Verifier: checks steps"}});
    auto out = recruit(math_goal, std::nullopt, 2, client(p), PromptLibrary::builtin());
    REQUIRE(out.profiles.size() == 2);
    CHECK(out.profiles[0].name == "Mathematician");
    CHECK(out.profiles[0].description == "expert in algebra");
    CHECK(out.profiles[1].name == "Verifier");
    CHECK(out.profiles[1].description == "checks steps");
    CHECK(out.profiles[1].index == 1);
    CHECK(out.source == RecruitmentSource::generated);
}

TEST_CASE("round 0 sees only the goal; later rounds see the feedback verbatim") {
    auto p = scripted({{"Recruiter", "1. A: a"}, {"Recruiter", "1. B: b"}});
    recruit(math_goal, std::nullopt, 1, client(p), PromptLibrary::builtin());
    recruit(math_goal, std::string("F1: check the units"), 1, client(p), PromptLibrary::builtin());
    auto prompts = testing::prompts_to(*p, "Recruiter");
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[0].find(math_goal.text) != std::string::npos);
    CHECK(prompts[0].find("Feedback") == std::string::npos);
    CHECK(prompts[1].find("F1: check the units") != std::string::npos);
}

TEST_CASE("a wrong count is re-asked once, then fails with the raw text") {
    auto ok = scripted({{"Recruiter", "1. Solo: one"}, {"Recruiter", "1. A: a\n2. B: b"}});
    auto out = recruit(math_goal, std::nullopt, 2, client(ok), PromptLibrary::builtin());
    CHECK(out.profiles.size() == 2);
    CHECK(testing::prompts_to(*ok, "Recruiter")[1].find("exactly 2") != std::string::npos);

    auto bad = scripted({{"Recruiter", "nobody"}, {"Recruiter", "still nobody"}});
    try {
        recruit(math_goal, std::nullopt, 2, client(bad), PromptLibrary::builtin());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.raw() == "still nobody");
    }
}

TEST_CASE("parse tolerates chatter, emphasis, and duplicate names") {
    auto profiles = parse_expert_list("Here is the team:\n1. **Chemist**: knows reactions\n\n2. Chemist: also chemistry\n3.Physicist:forces\n");
    REQUIRE(profiles.size() == 3);
    CHECK(profiles[0].name == "Chemist");
    CHECK(profiles[1].name == "Chemist-2");
    CHECK(profiles[2].name == "Physicist");
    CHECK(profiles[2].description == "forces");
}

TEST_CASE("property: rendering and parsing round-trip") {
    std::mt19937_64 rng(3);
    const std::string alphabet = "abcdefghij XYZ-'";
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ExpertProfile> profiles;
        int n = testing::uniform(rng, 1, 6);
        for (int i = 0; i < n; ++i) {
            std::string desc;
            int len = testing::uniform(rng, 1, 30);
            for (int k = 0; k < len; ++k) desc += alphabet[rng() % alphabet.size()];
            desc = text::trim(desc);
            if (desc.empty()) desc = "d";
            profiles.push_back({"Expert" + std::to_string(i), desc, i});
        }
        auto parsed = parse_expert_list(render_expert_list(profiles));
        CHECK(parsed == profiles);
    }
}

TEST_CASE("manual groups bypass recruitment and are validated") {
    std::vector<ExpertProfile> players{{"Alice", "an experienced Minecraft player", 0},
                                       {"Bob", "an experienced Minecraft player", 0},
                                       {"Charlie", "an experienced Minecraft player", 0}};
    auto out = manual_group(players);
    CHECK(out.source == RecruitmentSource::manual_override);
    REQUIRE(out.profiles.size() == 3);
    CHECK(out.profiles[2].index == 2);
    CHECK_THROWS_AS(manual_group({}), ValidationError);
    CHECK_THROWS_AS(manual_group({{"Alice", "x", 0}, {"Alice", "y", 1}}), ValidationError);
    CHECK_THROWS_AS(manual_group({{"Alice", " ", 0}}), ValidationError);
}

TEST_CASE("n_experts must be positive") {
    auto p = scripted({});
    CHECK_THROWS_AS(recruit(math_goal, std::nullopt, 0, client(p), PromptLibrary::builtin()), ConfigError);
}

}

TEST_SUITE("decision") {

const ExpertProfile solver{"Solver", "writes code", 0};
const ExpertProfile reviewer{"Reviewer", "checks code", 1};

TEST_CASE("immediate approval keeps the first proposal") {
    auto p = scripted({{"Solver", "a0"}, {"Reviewer", "APPROVE"}});
    auto out = decide_vertical(solver, {reviewer}, "ctx", 3, client(p), PromptLibrary::builtin());
    CHECK(out.decision.decision_text == "a0");
    CHECK(out.decision.refinements == 0);
    CHECK(out.discussion.terminated_by == Termination::consensus);
}

TEST_CASE("one rejection leads to one refinement that carries the critique") {
    auto p = scripted({{"Solver", "a0"}, {"Solver", "a1"}, {"Reviewer", "REJECT\nuse edge cases"}, {"Reviewer", "APPROVE"}});
    auto out = decide_vertical(solver, {reviewer}, "ctx", 3, client(p), PromptLibrary::builtin());
    CHECK(out.decision.refinements == 1);
    CHECK(out.decision.decision_text == "a1");
    auto prompts = testing::prompts_to(*p, "Solver");
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1].find("use edge cases") != std::string::npos);
    CHECK(prompts[1].find("a0") != std::string::npos);
}

TEST_CASE("always-rejecting reviewer stops at k_max and the final refinement is the decision") {
    auto p = scripted({{"Solver", "a0"}, {"Solver", "a1"}, {"Solver", "a2"}, {"Reviewer", "REJECT\nno"}, {"Reviewer", "REJECT\nno"}});
    auto out = decide_vertical(solver, {reviewer}, "ctx", 2, client(p), PromptLibrary::builtin());
    CHECK(out.decision.refinements == 2);
    CHECK(out.decision.decision_text == "a2");
    CHECK(out.discussion.terminated_by == Termination::refinement_cap);
    CHECK(p->remaining("Reviewer") == 0);
}

TEST_CASE("an unparsable review is re-asked, then counts as a rejection with the raw text") {
    auto p = scripted({{"Solver", "a0"}, {"Solver", "a1"}, {"Reviewer", "hmm"}, {"Reviewer", "maybe"}});
    auto out = decide_vertical(solver, {reviewer}, "ctx", 1, client(p), PromptLibrary::builtin());
    REQUIRE(out.reviews.size() == 1);
    CHECK_FALSE(out.reviews[0][0].approved);
    CHECK(out.reviews[0][0].critique == "maybe");
    CHECK(testing::prompts_to(*p, "Solver")[1].find("maybe") != std::string::npos);
}

TEST_CASE("review grammar") {
    CHECK(parse_review("r", "APPROVE")->approved);
    CHECK(parse_review("r", "  APPROVE  \nnice")->critique == "nice");
    CHECK_FALSE(parse_review("r", "REJECT\nbad")->approved);
    CHECK(parse_review("r", "REJECT")->critique == "(rejected without details)");
    CHECK_FALSE(parse_review("r", "approve").has_value());
    CHECK_FALSE(parse_review("r", "I APPROVE").has_value());
    CHECK_FALSE(parse_review("r", "").has_value());
}

TEST_CASE("property: review parse is total over first lines") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> heads{"APPROVE", "REJECT", "approve", "Approve.", "LGTM", "", "APPROVED", " APPROVE"};
    for (int i = 0; i < 300; ++i) {
        std::string head = heads[rng() % heads.size()];
        std::string body = head + "\nrest " + std::to_string(i);
        auto r = parse_review("x", body);
        bool approve_marker = text::trim(head) == "APPROVE";
        CHECK(r.has_value() == (approve_marker || text::trim(head) == "REJECT"));
        CHECK((r && r->approved) == approve_marker);
        if (r && !r->approved) CHECK_FALSE(r->critique.empty());
    }
}

TEST_CASE("three agents ending their second turns with [END] take six turns") {
    std::vector<ExpertProfile> agents{{"Alice", "a", 0}, {"Bob", "b", 1}, {"Carol", "c", 2}};
    auto p = scripted({{"Alice", "plan A"}, {"Bob", "plan B"}, {"Carol", "plan C"},
                       {"Alice", "ok [END]"}, {"Bob", "agreed [END]"}, {"Carol", "fine [END]"},
                       {"Summarizer", "Alice: x\nBob: y\nCarol: z"}});
    auto out = decide_horizontal(agents, "ctx", 20, true, client(p), PromptLibrary::builtin());
    CHECK(out.discussion.turns.size() == 6);
    CHECK(out.discussion.terminated_by == Termination::consensus);
    CHECK(out.summarizer_calls == 1);
    CHECK(out.decision.assignments.size() == 3);
}

TEST_CASE("without [END] the discussion stops at the turn cap and is still summarized") {
    std::vector<ExpertProfile> agents{{"Alice", "a", 0}, {"Bob", "b", 1}};
    auto p = scripted({{"Alice", "1"}, {"Bob", "2"}, {"Alice", "3"}, {"Bob", "4"}, {"Summarizer", "do it"}});
    auto out = decide_horizontal(agents, "ctx", 4, false, client(p), PromptLibrary::builtin());
    CHECK(out.discussion.turns.size() == 4);
    CHECK(out.discussion.terminated_by == Termination::turn_cap);
    CHECK(out.summarizer_calls == 1);
    CHECK(out.decision.decision_text == "do it");
}

TEST_CASE("summarizer output maps both agents") {
    auto a = parse_assignments("Alice: gather sugar cane; Bob: craft paper", {"Alice", "Bob"});
    CHECK(a == std::map<std::string, std::string>{{"Alice", "gather sugar cane"}, {"Bob", "craft paper"}});
    auto b = parse_assignments("- **Alice**: gather logs\n  then craft planks\n2. Bob: wait", {"Alice", "Bob"});
    CHECK(b.at("Alice") == "gather logs; then craft planks");
    CHECK(b.at("Bob") == "wait");
}

TEST_CASE("summarizer missing an agent is re-asked, then the uncovered agents are named") {
    std::vector<ExpertProfile> agents{{"Alice", "a", 0}, {"Bob", "b", 1}};
    auto fixed = scripted({{"Alice", "x [END]"}, {"Bob", "y [END]"}, {"Summarizer", "Alice: gather"},
                           {"Summarizer", "Alice: gather\nBob: craft"}});
    auto out = decide_horizontal(agents, "ctx", 4, true, client(fixed), PromptLibrary::builtin());
    CHECK(out.summarizer_calls == 2);
    CHECK(testing::prompts_to(*fixed, "Summarizer")[1].find("Missing: Bob") != std::string::npos);

    auto broken = scripted({{"Alice", "x [END]"}, {"Bob", "y [END]"}, {"Summarizer", "Alice: gather"},
                            {"Summarizer", "Alice: gather again"}});
    try {
        decide_horizontal(agents, "ctx", 4, true, client(broken), PromptLibrary::builtin());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("Bob") != std::string::npos);
    }
}

TEST_CASE("consensus detection") {
    const std::vector<std::string> ab{"A", "B"};
    CHECK(detect_consensus({{"A", "plan ok [END]"}, {"B", "agreed [END]"}}, ab));
    CHECK_FALSE(detect_consensus({{"A", "plan ok [END]"}}, ab));
    CHECK_FALSE(detect_consensus({{"A", "[END] and more text"}, {"B", "agreed [END]"}}, ab));
    CHECK(detect_consensus({{"A", "x [END]"}, {"B", "no"}, {"B", "ok [END] \n"}}, ab));
    CHECK_FALSE(detect_consensus({{"A", "x [END]"}, {"B", "y [END]"}, {"A", "wait"}}, ab));
}

TEST_CASE("solo decision is a single turn") {
    auto p = scripted({{"Solver", "answer 42"}});
    auto out = decide_solo(solver, "ctx", client(p), PromptLibrary::builtin());
    CHECK(out.decision.decision_text == "answer 42");
    CHECK(out.discussion.turns.size() == 1);
}

TEST_CASE("property: vertical protocol over random review patterns") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 60; ++i) {
        auto err = testing::vertical_trial(rng);
        CAPTURE(i);
        CHECK(err == "");
    }
}

TEST_CASE("property: horizontal protocol over random discussions") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 60; ++i) {
        auto err = testing::horizontal_trial(rng);
        CAPTURE(i);
        CHECK(err == "");
    }
}

TEST_CASE("configuration errors") {
    auto p = scripted({});
    CHECK_THROWS_AS(decide_vertical(solver, {}, "c", 1, client(p), PromptLibrary::builtin()), ConfigError);
    CHECK_THROWS_AS(decide_vertical(solver, {reviewer}, "c", 0, client(p), PromptLibrary::builtin()), ConfigError);
    CHECK_THROWS_AS(decide_horizontal({solver}, "c", 4, false, client(p), PromptLibrary::builtin()), ConfigError);
}

}
