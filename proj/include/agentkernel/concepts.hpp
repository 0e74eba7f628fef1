#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace agentkernel {

struct Coverage {
    std::set<std::string> covered;
    std::set<std::string> missing;

    double fraction() const {
        auto total = covered.size() + missing.size();
        return total == 0 ? 1.0 : static_cast<double>(covered.size()) / static_cast<double>(total);
    }
};

/// Surface forms of a lowercase token: the token itself plus each form obtained by removing one
/// of the suffixes s, es, ed, ing, d (when at least two characters remain).
std::set<std::string> suffix_variants(std::string_view token);

/// A concept is covered when some word of `text` (maximal ASCII alphanumeric run, lowercased)
/// shares a surface form with the concept. Concepts must be non-empty lowercase tokens.
Coverage concept_coverage(std::string_view text, const std::vector<std::string>& concepts);

} // namespace agentkernel
