#include "agentkernel/crafting.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel::crafting {

RecipeBook default_recipes() {
    const std::string table = "crafting_table";
    return {
        {"paper", Recipe{3, {{"sugar_cane", 3}}, table}},
        {"book", Recipe{1, {{"paper", 3}, {"leather", 1}}, table}},
        {"bookshelf", Recipe{1, {{"plank", 6}, {"book", 3}}, table}},
        {"plank", Recipe{4, {{"log", 1}}, std::nullopt}},
        {"crafting_table", Recipe{1, {{"plank", 4}}, std::nullopt}},
    };
}

namespace {

void add_items(Inventory& inv, const std::string& item, int n) {
    int& slot = inv[item];
    slot += n;
    if (slot == 0) inv.erase(item);
}

int count_of(const Inventory& inv, const std::string& item) {
    auto it = inv.find(item);
    return it == inv.end() ? 0 : it->second;
}

std::string inventory_text(const Inventory& inv) {
    if (inv.empty()) return "(empty)";
    std::vector<std::string> parts;
    for (const auto& [item, n] : inv) parts.push_back(item + " x" + std::to_string(n));
    return text::join(parts, ", ");
}

std::string pos_text(Pos p) { return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")"; }

Pos neighbor(Pos p, Direction d) {
    switch (d) {
    case Direction::north: return {p.x, p.y - 1};
    case Direction::east: return {p.x + 1, p.y};
    case Direction::south: return {p.x, p.y + 1};
    case Direction::west: return {p.x - 1, p.y};
    }
    return p;
}

constexpr Direction all_directions[] = {Direction::north, Direction::east, Direction::south, Direction::west};

Inventory parse_inventory(const json& j) {
    Inventory inv;
    if (j.is_null()) return inv;
    for (const auto& [item, n] : j.items()) {
        int count = n.get<int>();
        if (count < 0) throw ConfigError("negative count for " + item);
        if (count > 0) inv[item] = count;
    }
    return inv;
}

RecipeBook parse_recipes(const json& j) {
    RecipeBook book;
    for (const auto& [item, r] : j.items()) {
        Recipe recipe;
        recipe.yield = r.value("yield", 1);
        recipe.inputs = parse_inventory(r.at("inputs"));
        if (r.contains("station") && !r["station"].is_null()) recipe.station = r["station"].get<std::string>();
        if (recipe.yield < 1 || recipe.inputs.empty()) throw ConfigError("invalid recipe for " + item);
        book[item] = recipe;
    }
    return book;
}

} // namespace

// -- world ------------------------------------------------------------------------------------

World::World(int width, int height, RecipeBook recipes)
    : width_(width), height_(height), recipes_(std::move(recipes)) {
    if (width < 1 || height < 1) throw ConfigError("world dimensions must be positive");
    cells_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
}

World World::from_fixture(const json& fixture) {
    const auto& rows = fixture.at("grid");
    if (!rows.is_array() || rows.empty()) throw ConfigError("world grid must be a non-empty list of rows");
    int height = static_cast<int>(rows.size());
    int width = static_cast<int>(rows[0].get<std::string>().size());
    RecipeBook recipes = fixture.contains("recipes") ? parse_recipes(fixture["recipes"]) : default_recipes();
    World world(width, height, std::move(recipes));
    json legend = fixture.value("legend", json::object());

    for (int y = 0; y < height; ++y) {
        std::string row = rows[static_cast<std::size_t>(y)].get<std::string>();
        if (static_cast<int>(row.size()) != width) throw ConfigError("world grid rows differ in length");
        for (int x = 0; x < width; ++x) {
            char c = row[static_cast<std::size_t>(x)];
            Cell& cell = world.cell({x, y});
            if (c == '.') continue;
            if (c == '#') {
                cell.wall = true;
                continue;
            }
            std::string key(1, c);
            if (!legend.contains(key)) throw ConfigError("world grid uses undefined glyph '" + key + "'");
            const json& def = legend[key];
            if (def.contains("node")) {
                cell.node = ResourceNode{def["node"].get<std::string>(), def.value("stock", 1)};
                if (cell.node->stock < 0) throw ConfigError("negative node stock");
            }
            if (def.contains("station")) cell.station = def["station"].get<std::string>();
            if (def.contains("items")) cell.items = parse_inventory(def["items"]);
        }
    }
    for (const auto& a : fixture.value("agents", json::array())) {
        AgentState agent;
        agent.name = a.at("name").get<std::string>();
        auto pos = a.at("pos");
        agent.pos = {pos.at(0).get<int>(), pos.at(1).get<int>()};
        agent.inventory = parse_inventory(a.value("inventory", json::object()));
        world.add_agent(std::move(agent));
    }
    return world;
}

bool World::in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }

bool World::walkable(Pos p) const { return in_bounds(p) && !cell(p).wall; }

const Cell& World::cell(Pos p) const {
    if (!in_bounds(p)) throw ConfigError("position out of bounds: " + pos_text(p));
    return cells_[static_cast<std::size_t>(p.y * width_ + p.x)];
}

Cell& World::cell(Pos p) {
    return const_cast<Cell&>(static_cast<const World&>(*this).cell(p));
}

const AgentState* World::find_agent(const std::string& name) const {
    for (const auto& a : agents_) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

AgentState* World::find_agent(const std::string& name) {
    return const_cast<AgentState*>(static_cast<const World&>(*this).find_agent(name));
}

void World::add_agent(AgentState agent) {
    if (find_agent(agent.name)) throw ConfigError("duplicate agent " + agent.name);
    if (!walkable(agent.pos)) throw ConfigError("agent " + agent.name + " starts on a blocked cell");
    agents_.push_back(std::move(agent));
}

std::vector<std::string> World::known_items() const {
    std::set<std::string> items;
    for (const auto& c : cells_) {
        if (c.node) items.insert(c.node->item);
        if (c.station) items.insert(*c.station);
        for (const auto& [i, _] : c.items) items.insert(i);
    }
    for (const auto& [out, r] : recipes_) {
        items.insert(out);
        for (const auto& [i, _] : r.inputs) items.insert(i);
        if (r.station) items.insert(*r.station);
    }
    for (const auto& a : agents_) {
        for (const auto& [i, _] : a.inventory) items.insert(i);
    }
    return {items.begin(), items.end()};
}

bool World::is_known_item(const std::string& item) const {
    auto items = known_items();
    return std::binary_search(items.begin(), items.end(), item);
}

bool World::is_raw(const std::string& item) const {
    return std::any_of(cells_.begin(), cells_.end(),
                       [&](const Cell& c) { return c.node && c.node->item == item; });
}

Inventory World::totals() const {
    Inventory total;
    for (const auto& c : cells_) {
        if (c.node && c.node->stock > 0) total[c.node->item] += c.node->stock;
        for (const auto& [i, n] : c.items) total[i] += n;
    }
    for (const auto& a : agents_) {
        for (const auto& [i, n] : a.inventory) total[i] += n;
    }
    return total;
}

int World::max_held(const std::string& item) const {
    int best = 0;
    for (const auto& a : agents_) best = std::max(best, count_of(a.inventory, item));
    return best;
}

json World::to_json() const {
    json nodes = json::array(), stations = json::array(), dropped = json::array(), walls = json::array();
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const Cell& c = cell({x, y});
            json pos = {x, y};
            if (c.wall) walls.push_back(pos);
            if (c.node) nodes.push_back({{"pos", pos}, {"item", c.node->item}, {"stock", c.node->stock}});
            if (c.station) stations.push_back({{"pos", pos}, {"station", *c.station}});
            if (!c.items.empty()) dropped.push_back({{"pos", pos}, {"items", c.items}});
        }
    }
    json agents = json::array();
    for (const auto& a : agents_) {
        agents.push_back({{"name", a.name}, {"pos", {a.pos.x, a.pos.y}}, {"inventory", a.inventory}});
    }
    return json{{"width", width_},   {"height", height_},     {"walls", walls},    {"nodes", nodes},
                {"stations", stations}, {"dropped", dropped}, {"agents", agents}};
}

std::string World::render() const {
    std::string out = "World " + std::to_string(width_) + "x" + std::to_string(height_) +
                      " (x grows east, y grows south)\n";
    std::string nodes, stations, dropped;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const Cell& c = cell({x, y});
            if (c.node) {
                nodes += "- " + c.node->item + " at " + pos_text({x, y}) + ", stock " +
                         std::to_string(c.node->stock) + "\n";
            }
            if (c.station) stations += "- " + *c.station + " at " + pos_text({x, y}) + "\n";
            if (!c.items.empty()) dropped += "- " + pos_text({x, y}) + ": " + inventory_text(c.items) + "\n";
        }
    }
    out += "Resource nodes:\n" + (nodes.empty() ? "- none\n" : nodes);
    out += "Stations:\n" + (stations.empty() ? "- none\n" : stations);
    if (!dropped.empty()) out += "Items on the ground:\n" + dropped;
    out += "Agents:\n";
    for (const auto& a : agents_) {
        out += "- " + a.name + " at " + pos_text(a.pos) + ", inventory: " + inventory_text(a.inventory) + "\n";
    }
    return text::trim_right(out);
}

// -- primitive actions -----------------------------------------------------------------------

std::string describe(const Action& a) {
    static const char* dirs[] = {"north", "east", "south", "west"};
    switch (a.type) {
    case ActionType::move: return std::string("move ") + dirs[static_cast<int>(a.direction)];
    case ActionType::gather: return "gather " + a.item;
    case ActionType::craft: return "craft " + a.item;
    case ActionType::drop: return "drop " + std::to_string(a.count) + " " + a.item;
    case ActionType::pickup: return "pickup " + std::to_string(a.count) + " " + a.item;
    case ActionType::place_station: return "place " + a.item;
    }
    return "?";
}

namespace {

bool near_station(const World& world, Pos p, const std::string& station) {
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (std::abs(dx) + std::abs(dy) > 1) continue;
            Pos q{p.x + dx, p.y + dy};
            if (world.in_bounds(q) && world.cell(q).station == station) return true;
        }
    }
    return false;
}

bool is_station_item(const World& world, const std::string& item) {
    for (const auto& [_, r] : world.recipes()) {
        if (r.station == item) return true;
    }
    return false;
}

StepOutcome reject(std::string why) { return {false, std::move(why)}; }

} // namespace

StepOutcome step(World& world, const std::string& agent_name, const Action& action) {
    AgentState* agent = world.find_agent(agent_name);
    if (!agent) return reject("unknown agent " + agent_name);
    if (action.count < 1) return reject("count must be positive");
    Cell& here = world.cell(agent->pos);

    switch (action.type) {
    case ActionType::move: {
        Pos next = neighbor(agent->pos, action.direction);
        if (!world.walkable(next)) return reject("cannot move to " + pos_text(next));
        agent->pos = next;
        return {true, {}};
    }
    case ActionType::gather: {
        if (!here.node || here.node->item != action.item) {
            return reject("no " + action.item + " node at " + pos_text(agent->pos));
        }
        if (here.node->stock < 1) return reject(action.item + " node at " + pos_text(agent->pos) + " is depleted");
        --here.node->stock;
        add_items(agent->inventory, action.item, 1);
        return {true, {}};
    }
    case ActionType::craft: {
        auto r = world.recipes().find(action.item);
        if (r == world.recipes().end()) return reject("no recipe for " + action.item);
        const Recipe& recipe = r->second;
        if (recipe.station && !near_station(world, agent->pos, *recipe.station)) {
            return reject("crafting " + action.item + " requires a " + *recipe.station + " nearby");
        }
        std::vector<std::string> missing;
        for (const auto& [item, n] : recipe.inputs) {
            int have = count_of(agent->inventory, item);
            if (have < n) {
                missing.push_back(std::to_string(n) + " " + item + " (have " + std::to_string(have) + ")");
            }
        }
        if (!missing.empty()) return reject("missing inputs for " + action.item + ": " + text::join(missing, ", "));
        for (const auto& [item, n] : recipe.inputs) add_items(agent->inventory, item, -n);
        add_items(agent->inventory, action.item, recipe.yield);
        return {true, {}};
    }
    case ActionType::drop: {
        int have = count_of(agent->inventory, action.item);
        if (have < action.count) {
            return reject("cannot drop " + std::to_string(action.count) + " " + action.item + ", holding " +
                          std::to_string(have));
        }
        add_items(agent->inventory, action.item, -action.count);
        add_items(here.items, action.item, action.count);
        return {true, {}};
    }
    case ActionType::pickup: {
        int there = count_of(here.items, action.item);
        if (there < action.count) {
            return reject("only " + std::to_string(there) + " " + action.item + " on the ground here");
        }
        add_items(here.items, action.item, -action.count);
        add_items(agent->inventory, action.item, action.count);
        return {true, {}};
    }
    case ActionType::place_station: {
        if (!is_station_item(world, action.item)) return reject(action.item + " is not a station");
        if (count_of(agent->inventory, action.item) < 1) return reject("not holding a " + action.item);
        if (here.node || here.station) return reject("cell " + pos_text(agent->pos) + " is occupied");
        add_items(agent->inventory, action.item, -1);
        here.station = action.item;
        return {true, {}};
    }
    }
    return reject("unknown action");
}

// -- assignment parsing ---------------------------------------------------------------------

namespace {

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string normalize_item(const std::vector<std::string>& words, const World& world) {
    std::string item = text::join(words, "_");
    if (item.empty() || world.is_known_item(item)) return item;
    if (item.ends_with("ves")) {
        std::string f = item.substr(0, item.size() - 3) + "f";
        if (world.is_known_item(f)) return f;
    }
    if (item.ends_with("es") && world.is_known_item(item.substr(0, item.size() - 2))) {
        return item.substr(0, item.size() - 2);
    }
    if (item.ends_with("s") && world.is_known_item(item.substr(0, item.size() - 1))) {
        return item.substr(0, item.size() - 1);
    }
    return item;
}

std::string match_agent_name(const std::string& raw, const World& world) {
    for (const auto& a : world.agents()) {
        if (text::to_lower(a.name) == raw) return a.name;
    }
    return raw;
}

std::vector<std::string> words_of(const std::string& s) {
    std::vector<std::string> out;
    for (const auto& w : text::split(s, ' ')) {
        std::string t = text::trim(w);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

} // namespace

std::vector<SubGoal> parse_assignment(const std::string& assignment, const World& world) {
    std::string normalized = text::to_lower(assignment);
    normalized = replace_all(normalized, " then ", ",");
    normalized = replace_all(normalized, "\t", " ");
    for (char& c : normalized) {
        if (c == ';' || c == '\n') c = ',';
    }

    std::vector<SubGoal> goals;
    for (const auto& raw_piece : text::split(normalized, ',')) {
        std::string piece = text::trim(raw_piece);
        while (!piece.empty() && (piece.back() == '.' || piece.back() == '!')) piece.pop_back();
        for (const char* lead : {"then ", "and ", "- ", "* "}) {
            if (piece.starts_with(lead)) piece = text::trim(piece.substr(std::string(lead).size()));
        }
        if (piece.empty()) continue;

        auto words = words_of(piece);
        if (words.size() >= 2 && words[0] == "pick" && words[1] == "up") {
            words.erase(words.begin());
            words[0] = "pickup";
        }
        const std::string verb = words[0];
        SubGoal goal;
        goal.text = piece;

        static const std::set<std::string> wait_verbs{"wait", "idle", "rest", "nothing", "none"};
        static const std::set<std::string> gather_verbs{"gather", "collect", "mine", "harvest", "get", "punch", "chop"};
        static const std::set<std::string> craft_verbs{"craft", "make", "build"};
        static const std::set<std::string> deliver_verbs{"deliver", "give", "transfer", "hand"};

        std::vector<std::string> rest(words.begin() + 1, words.end());
        if (wait_verbs.count(verb)) {
            goal.kind = SubGoalKind::wait;
            goals.push_back(goal);
            continue;
        }
        if (gather_verbs.count(verb)) goal.kind = SubGoalKind::gather;
        else if (craft_verbs.count(verb)) goal.kind = SubGoalKind::craft;
        else if (deliver_verbs.count(verb)) goal.kind = SubGoalKind::deliver;
        else if (verb == "drop") goal.kind = SubGoalKind::drop;
        else if (verb == "pickup") goal.kind = SubGoalKind::pickup;
        else if (verb == "place" || verb == "put") goal.kind = SubGoalKind::place;
        else throw ParseError("unrecognized sub-goal '" + piece + "'", assignment);

        if (goal.kind == SubGoalKind::deliver) {
            auto to = std::find(rest.rbegin(), rest.rend(), "to");
            if (to == rest.rend()) throw ParseError("deliver needs a recipient: '" + piece + "'", assignment);
            auto idx = static_cast<std::size_t>(std::distance(rest.begin(), to.base()) - 1);
            std::vector<std::string> who(rest.begin() + static_cast<long>(idx) + 1, rest.end());
            if (who.empty()) throw ParseError("deliver needs a recipient: '" + piece + "'", assignment);
            goal.target = match_agent_name(text::join(who, " "), world);
            rest.resize(idx);
        }
        if (!rest.empty() && all_digits(rest[0])) {
            goal.count = std::stoi(rest[0]);
            rest.erase(rest.begin());
        }
        if (!rest.empty() && (rest[0] == "a" || rest[0] == "an" || rest[0] == "the")) rest.erase(rest.begin());
        if (rest.empty()) throw ParseError("missing item in '" + piece + "'", assignment);
        if (goal.count < 1) throw ParseError("count must be positive in '" + piece + "'", assignment);
        goal.item = normalize_item(rest, world);
        goals.push_back(goal);
    }
    if (goals.empty()) throw ParseError("assignment contains no sub-goals", assignment);
    return goals;
}

bool AgentResult::completed() const {
    return parse_error.empty() &&
           std::all_of(subgoals.begin(), subgoals.end(), [](const SubGoalResult& s) { return s.completed; });
}

void to_json(json& j, const SubGoalResult& r) {
    j = json{{"text", r.text}, {"completed", r.completed}, {"attempts", r.attempts}, {"reason", r.reason}};
}

void to_json(json& j, const AgentResult& r) {
    j = json{{"agent", r.agent}, {"assignment", r.assignment}, {"parse_error", r.parse_error},
             {"subgoals", r.subgoals}, {"completed", r.completed()}};
}

// -- planner --------------------------------------------------------------------------------

namespace {

enum class AttemptStatus { done, retry, permanent };

struct Attempt {
    AttemptStatus status = AttemptStatus::done;
    std::string reason;
};

class Planner {
public:
    Planner(World& world, const ActionObserver& observer) : world_(world), observer_(observer) {}

    Attempt run(const std::string& agent, const SubGoal& goal, const Inventory& baseline) {
        std::string why;
        auto fail = [&](AttemptStatus s) { return Attempt{s, why}; };
        int start = count_of(baseline, goal.item);

        switch (goal.kind) {
        case SubGoalKind::wait:
            return {};
        case SubGoalKind::gather:
            if (!world_.is_known_item(goal.item)) return {AttemptStatus::permanent, "unknown item: " + goal.item};
            if (!world_.is_raw(goal.item)) {
                return {AttemptStatus::permanent, goal.item + " is not a gatherable resource"};
            }
            return gather(agent, goal.item, start + goal.count, why) ? Attempt{} : fail(AttemptStatus::retry);
        case SubGoalKind::craft: {
            if (!world_.is_known_item(goal.item)) return {AttemptStatus::permanent, "unknown item: " + goal.item};
            auto r = world_.recipes().find(goal.item);
            if (r == world_.recipes().end()) return {AttemptStatus::permanent, "no recipe for " + goal.item};
            int yield = r->second.yield;
            int target = start + ((goal.count + yield - 1) / yield) * yield;
            while (held(agent, goal.item) < target) {
                if (!craft_once(agent, goal.item, 0, why)) return fail(AttemptStatus::retry);
            }
            return {};
        }
        case SubGoalKind::deliver: {
            if (!world_.is_known_item(goal.item)) return {AttemptStatus::permanent, "unknown item: " + goal.item};
            const AgentState* recipient = world_.find_agent(goal.target);
            if (!recipient || goal.target == agent) {
                return {AttemptStatus::permanent, "unknown recipient: " + goal.target};
            }
            int have = held(agent, goal.item);
            if (have < goal.count) {
                why = "holding only " + std::to_string(have) + " " + goal.item;
                return fail(AttemptStatus::retry);
            }
            Pos dest = recipient->pos;
            if (!go_to(agent, [&](Pos p) { return p == dest; }, goal.target, why)) return fail(AttemptStatus::retry);
            if (!act(agent, Action::drop(goal.item, goal.count), why)) return fail(AttemptStatus::retry);
            if (!act(goal.target, Action::pickup(goal.item, goal.count), why)) return fail(AttemptStatus::retry);
            return {};
        }
        case SubGoalKind::drop: {
            if (!world_.is_known_item(goal.item)) return {AttemptStatus::permanent, "unknown item: " + goal.item};
            return act(agent, Action::drop(goal.item, goal.count), why) ? Attempt{} : fail(AttemptStatus::retry);
        }
        case SubGoalKind::pickup: {
            if (!world_.is_known_item(goal.item)) return {AttemptStatus::permanent, "unknown item: " + goal.item};
            int target = start + goal.count;
            while (held(agent, goal.item) < target) {
                const std::string& item = goal.item;
                if (!go_to(agent, [&](Pos p) { return count_of(world_.cell(p).items, item) > 0; },
                           item + " on the ground", why)) {
                    return fail(AttemptStatus::retry);
                }
                Pos here = world_.find_agent(agent)->pos;
                int n = std::min(count_of(world_.cell(here).items, item), target - held(agent, item));
                if (!act(agent, Action::pickup(item, n), why)) return fail(AttemptStatus::retry);
            }
            return {};
        }
        case SubGoalKind::place:
            if (!world_.is_known_item(goal.item)) return {AttemptStatus::permanent, "unknown item: " + goal.item};
            return place(agent, goal.item, why) ? Attempt{} : fail(AttemptStatus::retry);
        }
        return {AttemptStatus::permanent, "unsupported sub-goal"};
    }

private:
    int held(const std::string& agent, const std::string& item) const {
        return count_of(world_.find_agent(agent)->inventory, item);
    }

    bool act(const std::string& agent, const Action& action, std::string& why) {
        StepOutcome out = step(world_, agent, action);
        if (observer_) observer_(world_, ActionRecord{agent, action, out});
        if (!out.accepted) why = out.reason;
        return out.accepted;
    }

    /// Shortest path (4-connected, fixed neighbor order) to the nearest cell satisfying `goal`.
    template <typename Pred>
    std::optional<std::vector<Pos>> path_to(Pos from, Pred goal) const {
        std::map<Pos, Pos> parent;
        std::deque<Pos> frontier{from};
        parent[from] = from;
        while (!frontier.empty()) {
            Pos cur = frontier.front();
            frontier.pop_front();
            if (goal(cur)) {
                std::vector<Pos> path;
                for (Pos p = cur; !(p == from); p = parent[p]) path.push_back(p);
                std::reverse(path.begin(), path.end());
                return path;
            }
            for (Direction d : all_directions) {
                Pos next = neighbor(cur, d);
                if (!world_.walkable(next) || parent.count(next)) continue;
                parent[next] = cur;
                frontier.push_back(next);
            }
        }
        return std::nullopt;
    }

    template <typename Pred>
    bool go_to(const std::string& agent, Pred goal, const std::string& what, std::string& why) {
        auto path = path_to(world_.find_agent(agent)->pos, goal);
        if (!path) {
            why = "no reachable " + what;
            return false;
        }
        for (Pos next : *path) {
            Pos cur = world_.find_agent(agent)->pos;
            Direction d = next.x > cur.x ? Direction::east
                          : next.x < cur.x ? Direction::west
                          : next.y > cur.y ? Direction::south
                                           : Direction::north;
            if (!act(agent, Action::move(d), why)) return false;
        }
        return true;
    }

    bool gather(const std::string& agent, const std::string& item, int target, std::string& why) {
        while (held(agent, item) < target) {
            auto has_stock = [&](Pos p) {
                const auto& node = world_.cell(p).node;
                return node && node->item == item && node->stock > 0;
            };
            if (!go_to(agent, has_stock, item + " with stock left", why)) return false;
            Pos here = world_.find_agent(agent)->pos;
            while (held(agent, item) < target && world_.cell(here).node->stock > 0) {
                if (!act(agent, Action::gather(item), why)) return false;
            }
        }
        return true;
    }

    bool obtain(const std::string& agent, const std::string& item, int qty, int depth, std::string& why) {
        while (held(agent, item) < qty) {
            if (world_.is_raw(item)) {
                if (!gather(agent, item, qty, why)) return false;
            } else if (world_.recipes().count(item)) {
                if (!craft_once(agent, item, depth + 1, why)) return false;
            } else {
                why = "no source of " + item;
                return false;
            }
        }
        return true;
    }

    bool place(const std::string& agent, const std::string& station, std::string& why) {
        if (held(agent, station) < 1) {
            why = "not holding a " + station;
            return false;
        }
        auto free = [&](Pos p) {
            const Cell& c = world_.cell(p);
            return !c.node && !c.station;
        };
        if (!go_to(agent, free, "free cell", why)) return false;
        return act(agent, Action::place(station), why);
    }

    bool reach_station(const std::string& agent, const std::string& station, int depth, std::string& why) {
        auto at_station = [&](Pos p) { return world_.cell(p).station == station; };
        if (path_to(world_.find_agent(agent)->pos, at_station)) return go_to(agent, at_station, station, why);
        if (held(agent, station) < 1) {
            if (!world_.recipes().count(station)) {
                why = "no " + station + " available";
                return false;
            }
            if (!craft_once(agent, station, depth + 1, why)) return false;
        }
        return place(agent, station, why);
    }

    bool craft_once(const std::string& agent, const std::string& item, int depth, std::string& why) {
        if (depth > 6) {
            why = "recipe chain for " + item + " is too deep";
            return false;
        }
        const Recipe& recipe = world_.recipes().at(item);
        if (recipe.station && !reach_station(agent, *recipe.station, depth, why)) return false;
        for (const auto& [input, qty] : recipe.inputs) {
            if (!obtain(agent, input, qty, depth, why)) {
                why = "cannot obtain " + std::to_string(qty) + " " + input + " for " + item + ": " + why;
                return false;
            }
        }
        if (recipe.station && !reach_station(agent, *recipe.station, depth, why)) return false;
        return act(agent, Action::craft(item), why);
    }

    World& world_;
    const ActionObserver& observer_;
};

struct AgentPlan {
    AgentResult result;
    std::vector<SubGoal> goals;
    std::size_t next = 0;
    Inventory baseline;

    bool active() const { return next < goals.size(); }
};

} // namespace

std::vector<AgentResult> execute_assignments(World& world,
                                             const std::vector<std::pair<std::string, std::string>>& assignments,
                                             int attempt_cap, const ActionObserver& observer) {
    if (attempt_cap < 1) throw ConfigError("attempt cap must be >= 1");
    std::vector<AgentPlan> plans;
    for (const auto& [agent, assignment] : assignments) {
        if (!world.find_agent(agent)) throw ConfigError("assignment names unknown agent " + agent);
        AgentPlan plan;
        plan.result.agent = agent;
        plan.result.assignment = assignment;
        try {
            plan.goals = parse_assignment(assignment, world);
        } catch (const ParseError& e) {
            plan.result.parse_error = e.what();
        }
        plans.push_back(std::move(plan));
    }

    Planner planner(world, observer);
    bool progressing = true;
    while (progressing) {
        progressing = false;
        for (auto& plan : plans) {
            if (!plan.active()) continue;
            progressing = true;
            const SubGoal& goal = plan.goals[plan.next];
            if (plan.result.subgoals.size() == plan.next) {
                plan.result.subgoals.push_back({goal.text, false, 0, {}});
                plan.baseline = world.find_agent(plan.result.agent)->inventory;
            }
            SubGoalResult& sr = plan.result.subgoals.back();
            ++sr.attempts;
            Attempt attempt = planner.run(plan.result.agent, goal, plan.baseline);
            if (attempt.status == AttemptStatus::done) {
                sr.completed = true;
                sr.reason.clear();
                ++plan.next;
            } else {
                sr.reason = attempt.reason;
                if (attempt.status == AttemptStatus::permanent || sr.attempts >= attempt_cap) ++plan.next;
            }
        }
    }

    std::vector<AgentResult> out;
    for (auto& plan : plans) out.push_back(std::move(plan.result));
    return out;
}

} // namespace agentkernel::crafting
