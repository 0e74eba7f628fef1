#include "agentkernel/events.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "agentkernel/error.hpp"

namespace agentkernel {

std::string to_string(RunStatus status) { return json(status).get<std::string>(); }

bool is_terminal(RunStatus status) {
    return status == RunStatus::solved || status == RunStatus::unsolved || status == RunStatus::aborted;
}

void to_json(json& j, const StageEvent& e) {
    j = json{{"seq", e.seq},   {"round", e.round},     {"stage", e.stage},
             {"kind", e.kind}, {"payload", e.payload}, {"timestamp", e.timestamp}};
    if (e.agent) j["agent"] = *e.agent;
}

void from_json(const json& j, StageEvent& e) {
    e.seq = j.at("seq").get<long long>();
    e.round = j.at("round").get<int>();
    j.at("stage").get_to(e.stage);
    if (!j.at("stage").is_string() || json(e.stage) != j.at("stage")) throw ValidationError("unknown stage");
    e.agent = j.contains("agent") && !j["agent"].is_null() ? std::optional(j["agent"].get<std::string>())
                                                           : std::nullopt;
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.value("payload", json::object());
    e.timestamp = j.value("timestamp", std::string{});
}

std::string canonical_line(const StageEvent& event, bool with_timestamp) {
    json j = event;
    if (!with_timestamp) j.erase("timestamp");
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void to_json(json& j, const RoundRecord& r) {
    j = json{{"index", r.index}};
    j["feedback_in"] = r.feedback_in ? json(*r.feedback_in) : json(nullptr);
    j["recruitment"] = r.recruitment ? json(*r.recruitment) : json(nullptr);
    j["decision"] = r.decision ? json(*r.decision) : json(nullptr);
    j["execution"] = r.execution ? json(*r.execution) : json(nullptr);
    j["state"] = r.state ? *r.state : json(nullptr);
    j["verdict"] = r.verdict ? json(*r.verdict) : json(nullptr);
}

json record_summary(const RunRecord& r) {
    return json{{"run_id", r.run_id},
                {"goal", r.goal},
                {"config", r.config},
                {"rounds", r.rounds},
                {"status", r.status},
                {"abort_cause", r.abort_cause ? json(*r.abort_cause) : json(nullptr)},
                {"event_count", r.events.size()}};
}

void to_json(json& j, const RunRecord& r) {
    j = record_summary(r);
    j["events"] = r.events;
}

namespace {

RoundRecord& round_for(RunRecord& record, const StageEvent& e) {
    if (e.round < 0) throw IntegrityError("negative round index", e.seq);
    while (static_cast<int>(record.rounds.size()) <= e.round) {
        RoundRecord r;
        r.index = static_cast<int>(record.rounds.size());
        record.rounds.push_back(std::move(r));
    }
    return record.rounds[static_cast<std::size_t>(e.round)];
}

} // namespace

void apply_event(RunRecord& record, const StageEvent& e) {
    auto expected = static_cast<long long>(record.events.size());
    if (e.seq != expected) {
        throw IntegrityError("sequence gap: expected seq " + std::to_string(expected) + ", found " +
                                 std::to_string(e.seq),
                             expected);
    }
    if (!record.events.empty()) {
        const StageEvent& prev = record.events.back();
        if (e.round < prev.round || (e.round == prev.round && e.stage < prev.stage)) {
            throw IntegrityError("stage order violated at seq " + std::to_string(e.seq), e.seq);
        }
    } else if (e.kind != event_kind::run_started) {
        throw IntegrityError("transcript does not begin with run_started", e.seq);
    }

    try {
        if (e.kind == event_kind::run_started) {
            record.run_id = e.payload.at("run_id").get<std::string>();
            record.goal = e.payload.at("goal").get<Goal>();
            record.config = e.payload.at("config").get<RunConfig>();
            record.status = RunStatus::running;
        } else if (e.kind == event_kind::round_started) {
            RoundRecord& r = round_for(record, e);
            const json& fb = e.payload.value("feedback", json(nullptr));
            r.feedback_in = fb.is_string() ? std::optional(fb.get<std::string>()) : std::nullopt;
        } else if (e.kind == event_kind::experts) {
            round_for(record, e).recruitment = e.payload.get<RecruitmentOutcome>();
        } else if (e.kind == event_kind::decision) {
            round_for(record, e).decision = e.payload.get<DecisionOutcome>();
        } else if (e.kind == event_kind::execution_report) {
            RoundRecord& r = round_for(record, e);
            r.execution = e.payload.at("report").get<ExecutionReport>();
            r.state = e.payload.at("state");
        } else if (e.kind == event_kind::verdict) {
            Verdict v = e.payload.at("verdict").get<Verdict>();
            round_for(record, e).verdict = v;
            record.status = RunStatus::running;
        } else if (e.kind == event_kind::awaiting_human) {
            round_for(record, e);
            record.status = RunStatus::awaiting_human;
        } else if (e.kind == event_kind::run_finished) {
            record.status = e.payload.at("status").get<RunStatus>();
        } else if (e.kind == event_kind::aborted) {
            record.status = RunStatus::aborted;
            record.abort_cause = e.payload.at("cause").get<std::string>();
        }
        // llm_call and unknown kinds carry no record state.
    } catch (const json::exception& ex) {
        throw IntegrityError("malformed " + e.kind + " payload at seq " + std::to_string(e.seq) + ": " + ex.what(),
                             e.seq);
    }
    record.events.push_back(e);
}

RunRecord fold_events(const std::vector<StageEvent>& events) {
    RunRecord record;
    for (const auto& e : events) apply_event(record, e);
    return record;
}

// -- transcript store -----------------------------------------------------------------------

TranscriptStore::TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path TranscriptStore::path_for(const std::string& run_id) const {
    if (run_id.empty() || run_id.find('/') != std::string::npos || run_id.find("..") != std::string::npos) {
        throw ValidationError("invalid run id '" + run_id + "'");
    }
    return dir_ / (run_id + ".jsonl");
}

void TranscriptStore::append(const std::string& run_id, const StageEvent& event) {
    std::lock_guard lock(mutex_);
    auto path = path_for(run_id);
    std::ofstream out(path, event.seq == 0 ? std::ios::trunc : std::ios::app);
    if (!out) throw Error("cannot write transcript " + path.string());
    out << canonical_line(event) << '\n';
}

std::vector<StageEvent> TranscriptStore::load(const std::string& run_id) const {
    std::lock_guard lock(mutex_);
    auto path = path_for(run_id);
    std::ifstream in(path);
    if (!in) throw NotFoundError("no transcript for run " + run_id);
    std::vector<StageEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto expected = static_cast<long long>(events.size());
        StageEvent e;
        try {
            e = json::parse(line).get<StageEvent>();
        } catch (const std::exception& ex) {
            throw IntegrityError("corrupt transcript line for seq " + std::to_string(expected) + ": " + ex.what(),
                                 expected);
        }
        if (e.seq != expected) {
            throw IntegrityError("sequence gap in transcript " + run_id + ": expected seq " + std::to_string(expected) +
                                     ", found " + std::to_string(e.seq),
                                 expected);
        }
        events.push_back(std::move(e));
    }
    if (events.empty()) throw IntegrityError("empty transcript for run " + run_id, 0);
    return events;
}

bool TranscriptStore::contains(const std::string& run_id) const {
    return std::filesystem::is_regular_file(path_for(run_id));
}

std::vector<std::string> TranscriptStore::list() const {
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// -- event log ------------------------------------------------------------------------------

void EventLog::append(const StageEvent& event) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw StateConflictError("event log is closed");
        events_.push_back(event);
    }
    cv_.notify_all();
}

void EventLog::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool EventLog::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::size_t EventLog::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

std::vector<StageEvent> EventLog::read_from(std::size_t from, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return events_.size() > from || closed_; });
    if (from >= events_.size()) return {};
    return {events_.begin() + static_cast<long>(from), events_.end()};
}

std::string utc_now() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
    return out;
}

} // namespace agentkernel
