#include "agentkernel/concepts.hpp"

#include <array>
#include <cctype>

#include "agentkernel/error.hpp"

namespace agentkernel {

std::set<std::string> suffix_variants(std::string_view token) {
    static constexpr std::array<std::string_view, 5> suffixes{"s", "es", "ed", "ing", "d"};
    std::set<std::string> forms{std::string(token)};
    for (auto suffix : suffixes) {
        if (token.size() >= suffix.size() + 2 && token.ends_with(suffix)) {
            forms.emplace(token.substr(0, token.size() - suffix.size()));
        }
    }
    return forms;
}

Coverage concept_coverage(std::string_view text, const std::vector<std::string>& concepts) {
    if (concepts.empty()) throw ValidationError("concept list must be non-empty");
    for (const auto& c : concepts) {
        bool ok = !c.empty();
        for (unsigned char ch : c) ok = ok && std::isalnum(ch) && !std::isupper(ch);
        if (!ok) throw ValidationError("concept must be a lowercase token: '" + c + "'");
    }

    std::set<std::string> forms;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        auto v = suffix_variants(word);
        forms.insert(v.begin(), v.end());
        word.clear();
    };
    for (unsigned char ch : text) {
        if (ch < 0x80 && std::isalnum(ch)) word.push_back(static_cast<char>(std::tolower(ch)));
        else flush();
    }
    flush();

    Coverage out;
    for (const auto& c : concepts) {
        bool hit = false;
        for (const auto& f : suffix_variants(c)) hit = hit || forms.count(f) != 0;
        (hit ? out.covered : out.missing).insert(c);
    }
    return out;
}

} // namespace agentkernel
