#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agentkernel/prompts.hpp"
#include "agentkernel/types.hpp"

namespace agentkernel {

enum class RecruitmentSource { generated, manual_override };
NLOHMANN_JSON_SERIALIZE_ENUM(RecruitmentSource, {{RecruitmentSource::generated, "generated"},
                                                 {RecruitmentSource::manual_override,
                                                  "manual_override"}})

struct RecruitmentOutcome {
    std::vector<ExpertProfile> profiles;
    std::string raw;
    RecruitmentSource source = RecruitmentSource::generated;

    bool operator==(const RecruitmentOutcome&) const = default;
};

void to_json(json& j, const RecruitmentOutcome& o);
void from_json(const json& j, RecruitmentOutcome& o);

/// Name used for the recruiter agent in transcripts and scripts.
inline constexpr const char* recruiter_agent = "Recruiter";

/// Parse `N. Name: Description` lines. Other lines are ignored. Duplicate names are
/// suffixed "-2", "-3", ... in order of appearance.
std::vector<ExpertProfile> parse_expert_list(std::string_view response);

/// Inverse of parse_expert_list for well-formed profiles.
std::string render_expert_list(const std::vector<ExpertProfile>& profiles);

/// Generate `n_experts` profiles from the goal and (optionally) the previous round's feedback.
/// A response that does not yield exactly `n_experts` profiles is re-asked once with a format
/// reminder; a second failure throws ParseError carrying the raw text.
RecruitmentOutcome recruit(const Goal& goal, const std::optional<std::string>& feedback,
                           int n_experts, const LlmClient& recruiter, const PromptLibrary& prompts);

/// Fixed group that bypasses recruitment for every round. Throws ValidationError on an
/// empty list, duplicate names, or blank fields.
RecruitmentOutcome manual_group(std::vector<ExpertProfile> profiles);

} // namespace agentkernel
