#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "agentkernel/providers.hpp"

namespace agentkernel {

using Bindings = std::map<std::string, std::string>;

/// A prompt template: one or more role sections with `{{name}}` placeholders.
/// `{{name|fallback}}` makes a placeholder optional.
///
/// Source format:
///     [system]
///     You are {{name}}.
///     [user]
///     {{goal}}
class PromptTemplate {
public:
    PromptTemplate(std::string id, const std::string& source);

    const std::string& id() const { return id_; }
    /// Placeholders without a fallback.
    std::set<std::string> required() const;

    std::vector<ChatMessage> render(const Bindings& bindings) const;

private:
    std::string id_;
    std::vector<std::pair<Role, std::string>> sections_;
};

/// Templates keyed by id. The built-in set is compiled in from assets/prompts.
class PromptLibrary {
public:
    static PromptLibrary builtin();

    /// Built-ins overlaid with every `<id>.txt` found in `dir`.
    static PromptLibrary with_overrides(const std::filesystem::path& dir);

    void add(std::string id, const std::string& source);
    bool contains(const std::string& id) const { return templates_.count(id) != 0; }
    const PromptTemplate& get(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

/// Render a template to chat messages. Throws ConfigError for an unknown template and
/// ValidationError("unbound placeholder: <name>") for a missing binding.
std::vector<ChatMessage> render_prompt(const PromptLibrary& library, const std::string& template_id,
                                       const Bindings& bindings);

/// Concatenated contents of a message list, for logging and assertions.
std::string flatten(const std::vector<ChatMessage>& messages);

} // namespace agentkernel
