#include "agentkernel/tools.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "agentkernel/calculator.hpp"
#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

void ToolRegistry::add(Tool tool) {
    if (tool.name.empty() || !tool.run) throw ConfigError("tool needs a name and a callable");
    auto name = tool.name;
    tools_.insert_or_assign(std::move(name), std::move(tool));
}

const Tool& ToolRegistry::get(const std::string& name) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw NotFoundError("unknown tool: " + name);
    return it->second;
}

std::vector<std::string> ToolRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : tools_) out.push_back(name);
    return out;
}

json ToolRegistry::schemas() const {
    json out = json::array();
    for (const auto& [name, tool] : tools_) {
        out.push_back({{"type", "function"},
                       {"function",
                        {{"name", name}, {"description", tool.description}, {"parameters", tool.parameters}}}});
    }
    return out;
}

std::string ToolRegistry::describe() const {
    std::string out;
    for (const auto& [name, tool] : tools_) {
        out += "- " + name + ": " + tool.description + " (arguments: " +
               tool.parameters.value("properties", json::object()).dump() + ")\n";
    }
    return text::trim_right(out);
}

namespace {

json object_schema(std::initializer_list<std::pair<const char*, const char*>> props,
                   std::vector<std::string> required) {
    json properties = json::object();
    for (const auto& [name, description] : props) {
        properties[name] = {{"type", "string"}, {"description", description}};
    }
    return {{"type", "object"}, {"properties", properties}, {"required", required}};
}

std::string string_arg(const json& args, const char* key) {
    if (!args.is_object() || !args.contains(key) || !args[key].is_string()) {
        throw ValidationError(std::string("missing string argument '") + key + "'");
    }
    return args[key].get<std::string>();
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

Tool calculator_tool() {
    return Tool{"calculator", "Evaluate an arithmetic expression such as (3+5)*2 or sqrt(16)",
                object_schema({{"expr", "arithmetic expression"}}, {"expr"}),
                [](const json& args) { return format_number(evaluate_expression(string_arg(args, "expr"))); }};
}

Tool file_fetch_tool(std::filesystem::path corpus_root) {
    auto run = [root = std::move(corpus_root)](const json& args) -> std::string {
        if (!std::filesystem::is_directory(root)) throw ConfigError("corpus directory missing");
        if (args.is_object() && args.contains("name")) {
            std::string name = string_arg(args, "name");
            if (name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
                throw ValidationError("document names may not contain paths");
            }
            auto p = root / name;
            if (!std::filesystem::is_regular_file(p)) throw NotFoundError("no document named " + name);
            return read_file(p);
        }
        std::string query = text::to_lower(string_arg(args, "query"));
        std::vector<std::string> terms;
        for (const auto& t : text::split(query, ' ')) {
            if (!text::trim(t).empty()) terms.push_back(text::trim(t));
        }
        std::vector<std::pair<int, std::string>> hits;
        for (const auto& entry : std::filesystem::directory_iterator(root)) {
            if (!entry.is_regular_file()) continue;
            std::string body = text::to_lower(read_file(entry.path()));
            int score = 0;
            for (const auto& t : terms) score += body.find(t) != std::string::npos ? 1 : 0;
            if (score > 0) hits.emplace_back(-score, entry.path().filename().string());
        }
        std::sort(hits.begin(), hits.end());
        if (hits.empty()) return "no documents matched";
        std::string out;
        for (std::size_t i = 0; i < hits.size() && i < 5; ++i) out += hits[i].second + "\n";
        return "matching documents (fetch with {\"name\": ...}):\n" + text::trim_right(out);
    };
    return Tool{"file_fetch", "Search the local document corpus with {\"query\"} or read one with {\"name\"}",
                object_schema({{"query", "search terms"}, {"name", "document file name"}}, {}), run};
}

Tool code_runner_tool(SandboxLimits limits) {
    auto run = [limits](const json& args) {
        std::string code = string_arg(args, "code");
        std::string tests = args.is_object() && args.contains("tests") ? string_arg(args, "tests") : "";
        return json(run_unit_tests(code, tests, limits)).dump();
    };
    return Tool{"code_runner", "Run Python code with optional test_* functions in a sandbox",
                object_schema({{"code", "python source"}, {"tests", "python test functions"}}, {"code"}),
                run};
}

ToolRegistry default_tools(const std::filesystem::path& corpus_root, SandboxLimits limits) {
    ToolRegistry registry;
    registry.add(calculator_tool());
    registry.add(file_fetch_tool(corpus_root));
    registry.add(code_runner_tool(std::move(limits)));
    return registry;
}

} // namespace agentkernel
