#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentkernel/decision.hpp"
#include "agentkernel/environment.hpp"
#include "agentkernel/recruitment.hpp"
#include "agentkernel/types.hpp"

namespace agentkernel {

enum class Stage { recruit, decide, execute, evaluate };
NLOHMANN_JSON_SERIALIZE_ENUM(Stage, {{Stage::recruit, "recruit"},
                                     {Stage::decide, "decide"},
                                     {Stage::execute, "execute"},
                                     {Stage::evaluate, "evaluate"}})

/// `running` is the in-flight state observed through the gateway; the other four are the
/// states a returned record can be in.
enum class RunStatus { running, solved, unsolved, aborted, awaiting_human };
NLOHMANN_JSON_SERIALIZE_ENUM(RunStatus, {{RunStatus::running, "running"},
                                         {RunStatus::solved, "solved"},
                                         {RunStatus::unsolved, "unsolved"},
                                         {RunStatus::aborted, "aborted"},
                                         {RunStatus::awaiting_human, "awaiting_human"}})

std::string to_string(RunStatus status);
/// Terminal statuses end event streams. awaiting_human is not terminal.
bool is_terminal(RunStatus status);

/// Event kinds written by the kernel.
namespace event_kind {
inline constexpr const char* run_started = "run_started";
inline constexpr const char* round_started = "round_started";
inline constexpr const char* llm_call = "llm_call";
inline constexpr const char* experts = "experts";
inline constexpr const char* decision = "decision";
inline constexpr const char* execution_report = "execution_report";
inline constexpr const char* verdict = "verdict";
inline constexpr const char* awaiting_human = "awaiting_human";
inline constexpr const char* run_finished = "run_finished";
inline constexpr const char* aborted = "aborted";
} // namespace event_kind

struct StageEvent {
    long long seq = 0;
    int round = 0;
    Stage stage = Stage::recruit;
    std::optional<std::string> agent;
    std::string kind;
    json payload = json::object();
    std::string timestamp;
};

void to_json(json& j, const StageEvent& e);
void from_json(const json& j, StageEvent& e);

/// One line of a transcript: compact JSON with sorted keys.
std::string canonical_line(const StageEvent& event, bool with_timestamp = true);

struct RoundRecord {
    int index = 0;
    /// Feedback from the previous round handed to recruitment.
    std::optional<std::string> feedback_in;
    std::optional<RecruitmentOutcome> recruitment;
    std::optional<DecisionOutcome> decision;
    std::optional<ExecutionReport> execution;
    std::optional<json> state;
    std::optional<Verdict> verdict;
};

void to_json(json& j, const RoundRecord& r);

struct RunRecord {
    std::string run_id;
    Goal goal;
    RunConfig config;
    std::vector<RoundRecord> rounds;
    RunStatus status = RunStatus::running;
    std::optional<std::string> abort_cause;
    std::vector<StageEvent> events;
};

/// Everything but the event list and timestamps; equal records have equal summaries.
json record_summary(const RunRecord& record);
void to_json(json& j, const RunRecord& r);

/// The reducer that builds a RunRecord from its events. Live runs and replays share it, which is
/// what makes replay reproduce the original record. Throws IntegrityError when `event.seq` is not
/// the next sequence number or the event breaks stage ordering.
void apply_event(RunRecord& record, const StageEvent& event);

/// Fold a complete transcript into a record.
RunRecord fold_events(const std::vector<StageEvent>& events);

/// Append-only JSON Lines transcripts, one file per run under `dir`.
class TranscriptStore {
public:
    explicit TranscriptStore(std::filesystem::path dir);

    void append(const std::string& run_id, const StageEvent& event);
    /// Parse a transcript. Throws NotFoundError when absent and IntegrityError (carrying the
    /// expected sequence number) on a corrupt line or a gap.
    std::vector<StageEvent> load(const std::string& run_id) const;
    bool contains(const std::string& run_id) const;
    std::vector<std::string> list() const;
    std::filesystem::path path_for(const std::string& run_id) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

/// In-memory append-only event log for one run with blocking reads for live subscribers.
class EventLog {
public:
    void append(const StageEvent& event);
    /// Marks the log complete; waiting readers wake up.
    void close();
    bool closed() const;
    std::size_t size() const;
    /// Events with seq >= from. Blocks up to `timeout` while none are available and the log is open.
    std::vector<StageEvent> read_from(std::size_t from, std::chrono::milliseconds timeout) const;

private:
    std::vector<StageEvent> events_;
    bool closed_ = false;
    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
};

/// ISO-8601 UTC wall-clock time with milliseconds.
std::string utc_now();

} // namespace agentkernel
