#include <doctest.h>

#include <random>

#include "agentkernel/crafting.hpp"
#include "agentkernel/environment.hpp"
#include "protocol_checks.hpp"
#include "test_support.hpp"

using namespace agentkernel;
using namespace agentkernel::crafting;

namespace {

World load_world(const std::string& name) {
    return World::from_fixture(json::parse(testing::read_text(testing::asset_dir() / "worlds" / (name + ".json"))));
}

/// Open 5x3 floor with a crafting table at (2,1).
World workshop() {
    World w(5, 3);
    w.cell({2, 1}).station = "crafting_table";
    return w;
}

} // namespace

TEST_SUITE("crafting") {

TEST_CASE("three sugar cane become three paper next to a table") {
    World w = workshop();
    w.add_agent({"Alice", {1, 1}, {{"sugar_cane", 3}}});
    auto out = step(w, "Alice", Action::craft("paper"));
    CHECK(out.accepted);
    CHECK(w.find_agent("Alice")->inventory == Inventory{{"paper", 3}});
}

TEST_CASE("crafting away from the station is rejected") {
    World w = workshop();
    w.add_agent({"Alice", {0, 0}, {{"sugar_cane", 3}}});
    auto out = step(w, "Alice", Action::craft("paper"));
    CHECK_FALSE(out.accepted);
    CHECK(out.reason.find("crafting_table") != std::string::npos);
}

TEST_CASE("a book with two paper is rejected and the world is unchanged") {
    World w = workshop();
    w.add_agent({"Alice", {2, 0}, {{"paper", 2}, {"leather", 1}}});
    World before = w;
    auto out = step(w, "Alice", Action::craft("book"));
    CHECK_FALSE(out.accepted);
    CHECK(out.reason.find("3 paper (have 2)") != std::string::npos);
    CHECK(w == before);
}

TEST_CASE("drop and pickup conserve items") {
    World w = workshop();
    w.add_agent({"Alice", {0, 0}, {{"leather", 2}}});
    w.add_agent({"Bob", {1, 0}, {}});
    testing::ConservationLedger ledger(w);
    auto run = [&](const std::string& who, const Action& a) {
        auto out = step(w, who, a);
        CHECK(ledger.check(w, ActionRecord{who, a, out}));
        return out.accepted;
    };
    CHECK(run("Alice", Action::drop("leather", 2)));
    CHECK(w.cell({0, 0}).items.at("leather") == 2);
    CHECK(run("Bob", Action::move(Direction::west)));
    CHECK(run("Bob", Action::pickup("leather", 1)));
    CHECK_FALSE(run("Bob", Action::pickup("leather", 5)));
    CHECK(w.find_agent("Bob")->inventory.at("leather") == 1);
    CHECK(ledger.violations() == 0);
}

TEST_CASE("walls block movement and stations are fixtures") {
    World w = World::from_fixture(json{{"grid", json::array({".#.", "..."})},
                                       {"agents", json::array({{{"name", "A"},
                                                                {"pos", {0, 0}},
                                                                {"inventory", {{"crafting_table", 1}}}}})}});
    CHECK_FALSE(step(w, "A", Action::move(Direction::east)).accepted);
    CHECK_FALSE(step(w, "A", Action::move(Direction::north)).accepted);
    CHECK(w.totals() == Inventory{{"crafting_table", 1}});
    CHECK(step(w, "A", Action::place("crafting_table")).accepted);
    CHECK(w.cell({0, 0}).station == "crafting_table");
    CHECK(w.totals().empty());
    CHECK_FALSE(step(w, "A", Action::place("paper")).accepted);
}

TEST_CASE("gathering walks a shortest path to the node") {
    World w = World::from_fixture(json{
        {"grid", json::array({"#######", "#..#..#", "#..#.S#", "#.....#", "#######"})},
        {"legend", {{"S", {{"node", "sugar_cane"}, {"stock", 5}}}}},
        {"agents", json::array({{{"name", "Alice"}, {"pos", {1, 1}}}})}});
    const Pos start{1, 1}, node{5, 2};
    int expected = testing::bfs_distance(w, start, node);
    REQUIRE(expected == 7);
    int moves = 0;
    testing::ConservationLedger ledger(w);
    auto results = execute_assignments(w, {{"Alice", "gather 3 sugar_cane"}}, default_attempt_cap,
                                       [&](const World& now, const ActionRecord& r) {
                                           if (r.action.type == ActionType::move && r.outcome.accepted) ++moves;
                                           CHECK(ledger.check(now, r));
                                       });
    REQUIRE(results.size() == 1);
    CHECK(results[0].completed());
    CHECK(moves == expected);
    CHECK(w.find_agent("Alice")->inventory.at("sugar_cane") == 3);
    CHECK(w.cell(node).node->stock == 2);
}

TEST_CASE("unknown items fail permanently after one attempt") {
    World w = workshop();
    w.add_agent({"Alice", {0, 0}, {}});
    auto results = execute_assignments(w, {{"Alice", "gather 1 unobtainium"}});
    REQUIRE(results[0].subgoals.size() == 1);
    CHECK_FALSE(results[0].completed());
    CHECK(results[0].subgoals[0].attempts == 1);
    CHECK(results[0].subgoals[0].reason == "unknown item: unobtainium");
}

TEST_CASE("retries stop at the attempt cap") {
    World w = workshop();
    w.cell({4, 2}).node = ResourceNode{"sugar_cane", 0};
    w.add_agent({"Alice", {0, 0}, {}});
    auto results = execute_assignments(w, {{"Alice", "gather 2 sugar cane"}}, 3);
    CHECK(results[0].subgoals[0].attempts == 3);
    CHECK(results[0].subgoals[0].reason.find("no reachable sugar_cane") != std::string::npos);
    CHECK_THROWS_AS(execute_assignments(w, {{"Zed", "wait"}}), ConfigError);
    CHECK_THROWS_AS(execute_assignments(w, {{"Alice", "wait"}}, 0), ConfigError);
}

TEST_CASE("deliver hands items over across two rounds") {
    World w = load_world("paper");
    testing::ConservationLedger ledger(w);
    ActionObserver check = [&](const World& now, const ActionRecord& r) { CHECK(ledger.check(now, r)); };

    auto r0 = execute_assignments(w, {{"Alice", "gather 3 sugar cane"}, {"Bob", "craft 2 paper"}},
                                  default_attempt_cap, check);
    CHECK(r0[0].completed());
    CHECK_FALSE(r0[1].completed());
    CHECK(r0[1].subgoals[0].attempts == default_attempt_cap);
    CHECK(w.find_agent("Alice")->inventory.at("sugar_cane") == 3);

    auto r1 = execute_assignments(w, {{"Alice", "deliver 3 sugar cane to Bob"}, {"Bob", "craft 2 paper"}},
                                  default_attempt_cap, check);
    CHECK(r1[0].completed());
    CHECK(r1[1].completed());
    CHECK(w.max_held("paper") == 3);
    CHECK(w.find_agent("Alice")->inventory.count("sugar_cane") == 0);
    CHECK(ledger.violations() == 0);
}

TEST_CASE("parse_assignment grammar") {
    World w = load_world("book");
    auto goals = parse_assignment("Gather 9 sugar canes, then craft 3 paper; deliver 1 leather to bob\nwait.", w);
    REQUIRE(goals.size() == 4);
    CHECK(goals[0].kind == SubGoalKind::gather);
    CHECK(goals[0].count == 9);
    CHECK(goals[0].item == "sugar_cane");
    CHECK(goals[1].kind == SubGoalKind::craft);
    CHECK(goals[1].item == "paper");
    CHECK(goals[2].kind == SubGoalKind::deliver);
    CHECK(goals[2].target == "Bob");
    CHECK(goals[3].kind == SubGoalKind::wait);

    auto q = parse_assignment("pick up 2 leather, place a crafting table", w);
    REQUIRE(q.size() == 2);
    CHECK(q[0].count == 2);
    CHECK(q[1].kind == SubGoalKind::place);
    CHECK(q[1].item == "crafting_table");

    CHECK_THROWS_AS(parse_assignment("dance wildly", w), ParseError);
    CHECK_THROWS_AS(parse_assignment("deliver 3 paper", w), ParseError);
    CHECK_THROWS_AS(parse_assignment("craft 0 paper", w), ParseError);
    CHECK_THROWS_AS(parse_assignment("  ", w), ParseError);
}

TEST_CASE("the crafting environment reports per-agent results in profile order") {
    std::vector<ExpertProfile> agents{{"Alice", "", 0}, {"Bob", "", 1}};
    auto provider = testing::scripted({});
    auto llm = testing::client(provider);
    auto prompts = PromptLibrary::builtin();
    ExecutionContext ctx{agents, llm, prompts, "craft paper"};
    CraftingEnvironment env(load_world("paper"));
    GroupDecision d;
    d.assignments = {{"Bob", "wait"}, {"Alice", "gather 3 sugar cane"}};
    auto report = execute(d, env, TaskKind::crafting, ctx);
    CHECK(report.ok);
    auto results = env.state()["results"];
    REQUIRE(results.size() == 2);
    CHECK(results[0]["agent"] == "Alice");
    CHECK(results[1]["agent"] == "Bob");
    CHECK(env.observation().find("Alice") != std::string::npos);
    CHECK(provider->calls().empty());
}

TEST_CASE("property: rejected actions never change the world") {
    std::mt19937_64 rng(17);
    const std::vector<std::string> items{"sugar_cane", "paper", "leather", "book", "log", "plank", "crafting_table",
                                         "bookshelf", "stone"};
    for (int trial = 0; trial < 200; ++trial) {
        World w(4, 4);
        if (testing::chance(rng, 0.5)) w.cell({1, 1}).station = "crafting_table";
        w.cell({2, 2}).node = ResourceNode{"sugar_cane", testing::uniform(rng, 0, 2)};
        w.cell({3, 0}).wall = true;
        Inventory inv;
        for (const auto& it : items) {
            if (testing::chance(rng, 0.3)) inv[it] = testing::uniform(rng, 1, 4);
        }
        w.add_agent({"A", {testing::uniform(rng, 0, 2), testing::uniform(rng, 0, 3)}, inv});
        testing::ConservationLedger ledger(w);
        for (int k = 0; k < 30; ++k) {
            const auto& item = items[rng() % items.size()];
            Action a;
            switch (rng() % 6) {
            case 0: a = Action::move(static_cast<Direction>(rng() % 4)); break;
            case 1: a = Action::gather(item); break;
            case 2: a = Action::craft(item); break;
            case 3: a = Action::drop(item, testing::uniform(rng, 0, 3)); break;
            case 4: a = Action::pickup(item, testing::uniform(rng, 1, 3)); break;
            default: a = Action::place(item); break;
            }
            World before = w;
            auto out = step(w, "A", a);
            if (!out.accepted) {
                CHECK(w == before);
                CHECK_FALSE(out.reason.empty());
            }
            CHECK(ledger.check(w, ActionRecord{"A", a, out}));
        }
    }
}

TEST_CASE("property: planned execution conserves items and respects the attempt cap") {
    std::mt19937_64 rng(29);
    const std::vector<std::string> pieces{"gather 2 sugar cane", "craft 3 paper",  "craft 1 book",
                                          "gather 1 log",        "craft 4 planks", "deliver 2 paper to B",
                                          "deliver 1 leather to A", "drop 1 leather", "pick up 1 leather",
                                          "place a crafting table",  "wait",          "craft 1 bookshelf"};
    for (int trial = 0; trial < 80; ++trial) {
        World w(6, 4);
        w.cell({0, 3}).node = ResourceNode{"sugar_cane", testing::uniform(rng, 0, 6)};
        w.cell({5, 0}).node = ResourceNode{"log", testing::uniform(rng, 0, 2)};
        w.cell({3, 1}).wall = testing::chance(rng, 0.5);
        w.add_agent({"A", {1, 1}, {{"leather", testing::uniform(rng, 0, 2)}}});
        w.add_agent({"B", {4, 2}, {{"crafting_table", testing::uniform(rng, 0, 1)}}});
        auto plan = [&] {
            std::string s;
            int n = testing::uniform(rng, 1, 3);
            for (int i = 0; i < n; ++i) s += (i ? ", then " : "") + pieces[rng() % pieces.size()];
            return s;
        };
        int cap = testing::uniform(rng, 1, 5);
        testing::ConservationLedger ledger(w);
        auto results = execute_assignments(w, {{"A", plan()}, {"B", plan()}}, cap,
                                           [&](const World& now, const ActionRecord& r) { ledger.check(now, r); });
        CHECK(ledger.violations() == 0);
        for (const auto& r : results) {
            for (const auto& s : r.subgoals) {
                CHECK(s.attempts >= 1);
                CHECK(s.attempts <= cap);
                CHECK(s.completed == s.reason.empty());
            }
        }
    }
}

}
