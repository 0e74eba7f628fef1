#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers.
namespace agentkernel::text {

std::string trim(std::string_view s);
std::string trim_right(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// First line of `s` (without the newline) and everything after it.
std::pair<std::string, std::string> head_and_rest(std::string_view s);

} // namespace agentkernel::text
