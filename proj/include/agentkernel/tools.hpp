#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "agentkernel/sandbox.hpp"
#include "agentkernel/types.hpp"

namespace agentkernel {

/// A callable tool. `run` returns the observation text; throwing reports an error observation.
struct Tool {
    std::string name;
    std::string description;
    /// JSON schema of the arguments object.
    json parameters;
    std::function<std::string(const json& arguments)> run;
};

class ToolRegistry {
public:
    void add(Tool tool);
    bool contains(const std::string& name) const { return tools_.count(name) != 0; }
    const Tool& get(const std::string& name) const;
    std::vector<std::string> names() const;

    /// Wire-format function schemas (`[{"type": "function", "function": {...}}]`).
    json schemas() const;
    /// "- name: description (arguments: {...})" lines for text prompts.
    std::string describe() const;

private:
    std::map<std::string, Tool> tools_;
};

/// Arithmetic over {"expr": "..."}.
Tool calculator_tool();
/// Looks up documents under `corpus_root` by {"name": ...} or {"query": ...}; stands in for web
/// search and browsing.
Tool file_fetch_tool(std::filesystem::path corpus_root);
/// Runs {"code": ..., "tests": ...} in the sandbox and returns the TestReport as JSON.
Tool code_runner_tool(SandboxLimits limits = {});

ToolRegistry default_tools(const std::filesystem::path& corpus_root, SandboxLimits limits = {});

} // namespace agentkernel
