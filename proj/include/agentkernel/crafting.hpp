#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentkernel/types.hpp"

namespace agentkernel::crafting {

using Inventory = std::map<std::string, int>;

struct Pos {
    int x = 0;
    int y = 0;

    bool operator==(const Pos&) const = default;
    auto operator<=>(const Pos&) const = default;
};

struct ResourceNode {
    std::string item;
    int stock = 0;

    bool operator==(const ResourceNode&) const = default;
};

struct Recipe {
    int yield = 1;
    Inventory inputs;
    /// Station that must be on or next to the crafter's cell.
    std::optional<std::string> station;

    bool operator==(const Recipe&) const = default;
};

using RecipeBook = std::map<std::string, Recipe>;

struct Cell {
    bool wall = false;
    std::optional<ResourceNode> node;
    std::optional<std::string> station;
    Inventory items;

    bool operator==(const Cell&) const = default;
};

struct AgentState {
    std::string name;
    Pos pos;
    Inventory inventory;

    bool operator==(const AgentState&) const = default;
};

/// 3 sugar_cane -> 3 paper; 3 paper + 1 leather -> book; 6 plank + 3 book -> bookshelf;
/// log -> 4 plank; 4 plank -> crafting_table. Paper, book, and bookshelf need a crafting_table.
RecipeBook default_recipes();

/// Deterministic gridworld with resource nodes, per-agent inventories, and recipe crafting.
class World {
public:
    World(int width, int height, RecipeBook recipes = default_recipes());

    /// Fixture format:
    /// {"grid": ["S.#", ...], "legend": {"S": {"node": "sugar_cane", "stock": 3},
    ///  "T": {"station": "crafting_table"}}, "agents": [{"name", "pos": [x, y], "inventory"}],
    ///  "recipes": {...}}   ('.' is empty floor, '#' is wall; recipes default to the built-in book)
    static World from_fixture(const json& fixture);

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(Pos p) const;
    bool walkable(Pos p) const;
    const Cell& cell(Pos p) const;
    Cell& cell(Pos p);

    const std::vector<AgentState>& agents() const { return agents_; }
    const AgentState* find_agent(const std::string& name) const;
    AgentState* find_agent(const std::string& name);
    void add_agent(AgentState agent);

    const RecipeBook& recipes() const { return recipes_; }
    /// Items that appear anywhere: node resources, recipe inputs and outputs, stations.
    std::vector<std::string> known_items() const;
    bool is_known_item(const std::string& item) const;
    /// Items some node produces (regardless of remaining stock).
    bool is_raw(const std::string& item) const;

    /// Count of every item across node stock, inventories, and dropped piles. Placed stations
    /// are fixtures and do not count.
    Inventory totals() const;
    /// Largest count of `item` held by a single agent.
    int max_held(const std::string& item) const;

    json to_json() const;
    /// Human-readable state used as the agents' observation.
    std::string render() const;

    bool operator==(const World&) const = default;

private:
    int width_;
    int height_;
    std::vector<Cell> cells_;
    std::vector<AgentState> agents_;
    RecipeBook recipes_;
};

enum class ActionType { move, gather, craft, drop, pickup, place_station };

enum class Direction { north, east, south, west };

struct Action {
    ActionType type = ActionType::move;
    Direction direction = Direction::north;
    std::string item;
    int count = 1;

    static Action move(Direction d) { return {ActionType::move, d, {}, 1}; }
    static Action gather(std::string item) { return {ActionType::gather, {}, std::move(item), 1}; }
    static Action craft(std::string item) { return {ActionType::craft, {}, std::move(item), 1}; }
    static Action drop(std::string item, int n) { return {ActionType::drop, {}, std::move(item), n}; }
    static Action pickup(std::string item, int n) { return {ActionType::pickup, {}, std::move(item), n}; }
    static Action place(std::string station) { return {ActionType::place_station, {}, std::move(station), 1}; }
};

std::string describe(const Action& action);

struct StepOutcome {
    bool accepted = false;
    std::string reason;
};

struct ActionRecord {
    std::string agent;
    Action action;
    StepOutcome outcome;
};

/// Apply one primitive action. A rejected action leaves the world unchanged.
StepOutcome step(World& world, const std::string& agent, const Action& action);

// -- assignment execution -------------------------------------------------------------------

enum class SubGoalKind { gather, craft, deliver, drop, pickup, place, wait };

struct SubGoal {
    SubGoalKind kind = SubGoalKind::wait;
    int count = 1;
    std::string item;
    /// Recipient for deliver.
    std::string target;
    std::string text;
};

/// Parse an assignment into sub-goals. Pieces are separated by ',', ';', newlines, or "then":
///   gather|collect <n> <item>     craft|make <n> <item>     deliver|give <n> <item> to <agent>
///   drop <n> <item>               pick up <n> <item>        place <station>       wait
/// The count defaults to 1; multi-word items are joined with '_'. Throws ParseError.
std::vector<SubGoal> parse_assignment(const std::string& assignment, const World& world);

struct SubGoalResult {
    std::string text;
    bool completed = false;
    int attempts = 0;
    std::string reason;
};

struct AgentResult {
    std::string agent;
    std::string assignment;
    std::string parse_error;
    std::vector<SubGoalResult> subgoals;

    bool completed() const;
};

void to_json(json& j, const SubGoalResult& r);
void to_json(json& j, const AgentResult& r);

using ActionObserver = std::function<void(const World&, const ActionRecord&)>;

inline constexpr int default_attempt_cap = 5;

/// Execute each agent's assignment with the built-in planner. Agents take turns in `order`
/// (one sub-goal attempt per turn); a sub-goal is retried until it succeeds or `attempt_cap`
/// attempts have been made. Every primitive action is reported to `observer`.
/// Throws ConfigError when an assignment names an agent that is not in the world.
std::vector<AgentResult> execute_assignments(World& world,
                                             const std::vector<std::pair<std::string, std::string>>& assignments,
                                             int attempt_cap = default_attempt_cap,
                                             const ActionObserver& observer = {});

} // namespace agentkernel::crafting
