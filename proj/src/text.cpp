#include "agentkernel/text.hpp"

#include <algorithm>
#include <cctype>

namespace agentkernel::text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
} // namespace

std::string trim(std::string_view s) {
    auto begin = std::find_if_not(s.begin(), s.end(), is_space);
    auto end = std::find_if_not(s.rbegin(), s.rend(), is_space).base();
    return begin < end ? std::string(begin, end) : std::string{};
}

std::string trim_right(std::string_view s) {
    auto end = std::find_if_not(s.rbegin(), s.rend(), is_space).base();
    return std::string(s.begin(), end);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(s.substr(start));
            break;
        }
        parts.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::vector<std::string> split_lines(std::string_view s) {
    auto lines = split(s, '\n');
    for (auto& line : lines) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }
    return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::pair<std::string, std::string> head_and_rest(std::string_view s) {
    auto pos = s.find('\n');
    if (pos == std::string_view::npos) return {std::string(s), {}};
    std::string head(s.substr(0, pos));
    if (!head.empty() && head.back() == '\r') head.pop_back();
    return {head, std::string(s.substr(pos + 1))};
}

} // namespace agentkernel::text
