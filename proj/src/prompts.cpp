#include "agentkernel/prompts.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

namespace detail {
// Generated at build time from assets/prompts/*.txt.
const std::vector<std::pair<const char*, const char*>>& builtin_prompt_sources();
} // namespace detail

namespace {

const std::regex& placeholder_pattern() {
    static const std::regex re(R"(\{\{([a-z_][a-z0-9_]*)(?:\|([^}]*))?\}\})");
    return re;
}

Role parse_section(const std::string& header, const std::string& id) {
    if (header == "[system]") return Role::system;
    if (header == "[user]") return Role::user;
    if (header == "[assistant]") return Role::assistant;
    throw ConfigError("prompt '" + id + "': unknown section " + header);
}

} // namespace

PromptTemplate::PromptTemplate(std::string id, const std::string& source) : id_(std::move(id)) {
    std::optional<Role> role;
    std::vector<std::string> body;
    auto flush = [&] {
        if (role) sections_.emplace_back(*role, text::trim(text::join(body, "\n")));
        body.clear();
    };
    for (const auto& line : text::split_lines(source)) {
        std::string t = text::trim(line);
        if (t.size() > 2 && t.front() == '[' && t.back() == ']' && t.find(' ') == std::string::npos) {
            flush();
            role = parse_section(t, id_);
            continue;
        }
        if (!role) {
            if (t.empty()) continue;
            throw ConfigError("prompt '" + id_ + "': text before the first section");
        }
        body.push_back(line);
    }
    flush();
    if (sections_.empty()) throw ConfigError("prompt '" + id_ + "' has no sections");
}

std::set<std::string> PromptTemplate::required() const {
    std::set<std::string> names;
    for (const auto& [role, body] : sections_) {
        for (std::sregex_iterator it(body.begin(), body.end(), placeholder_pattern()), end; it != end;
             ++it) {
            if (!(*it)[2].matched) names.insert((*it)[1].str());
        }
    }
    return names;
}

std::vector<ChatMessage> PromptTemplate::render(const Bindings& bindings) const {
    std::vector<ChatMessage> out;
    for (const auto& [role, body] : sections_) {
        std::string rendered;
        auto last = body.cbegin();
        for (std::sregex_iterator it(body.begin(), body.end(), placeholder_pattern()), end; it != end;
             ++it) {
            const auto& m = *it;
            rendered.append(last, m[0].first);
            auto bound = bindings.find(m[1].str());
            if (bound != bindings.end()) {
                rendered += bound->second;
            } else if (m[2].matched) {
                rendered += m[2].str();
            } else {
                throw ValidationError("unbound placeholder: " + m[1].str());
            }
            last = m[0].second;
        }
        rendered.append(last, body.cend());
        out.push_back(ChatMessage{role, rendered, std::nullopt, json(), std::nullopt});
    }
    return out;
}

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    for (const auto& [id, source] : detail::builtin_prompt_sources()) lib.add(id, source);
    return lib;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
    PromptLibrary lib = builtin();
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("prompt directory not found: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        std::stringstream ss;
        ss << in.rdbuf();
        lib.add(entry.path().stem().string(), ss.str());
    }
    return lib;
}

void PromptLibrary::add(std::string id, const std::string& source) {
    PromptTemplate tmpl(id, source);
    templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

const PromptTemplate& PromptLibrary::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + id);
    return it->second;
}

std::vector<std::string> PromptLibrary::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

std::vector<ChatMessage> render_prompt(const PromptLibrary& library, const std::string& template_id,
                                       const Bindings& bindings) {
    return library.get(template_id).render(bindings);
}

std::string flatten(const std::vector<ChatMessage>& messages) {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += "\n";
        out += m.content;
    }
    return out;
}

} // namespace agentkernel
