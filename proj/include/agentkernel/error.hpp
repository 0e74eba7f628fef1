#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace agentkernel {

/// Base of every error the engine raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, task definition, or precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A value that violates a domain invariant (duplicate names, empty feedback, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A validation failure attributable to one named input field (e.g. "gold.answer").
class FieldError : public ValidationError {
public:
    FieldError(const std::string& field, const std::string& what) : ValidationError(what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Model output that does not follow the expected grammar.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string raw)
        : Error(what), raw_(std::move(raw)) {}

    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// A provider call that failed. `retryable()` drives the retry policy.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool retryable, int http_status = 0)
        : Error(what), retryable_(retryable), http_status_(http_status) {}

    bool retryable() const noexcept { return retryable_; }
    int http_status() const noexcept { return http_status_; }

private:
    bool retryable_;
    int http_status_;
};

/// Scripted provider ran out of entries for an agent.
class ScriptExhaustedError : public ProviderError {
public:
    ScriptExhaustedError(const std::string& agent, std::size_t cursor)
        : ProviderError("script exhausted for agent '" + agent + "' at cursor " +
                            std::to_string(cursor),
                        false),
          agent_(agent), cursor_(cursor) {}

    const std::string& agent() const noexcept { return agent_; }
    std::size_t cursor() const noexcept { return cursor_; }

private:
    std::string agent_;
    std::size_t cursor_;
};

/// All retry attempts failed; carries one line per attempt.
class RetryExhaustedError : public ProviderError {
public:
    RetryExhaustedError(const std::string& what, std::vector<std::string> attempts)
        : ProviderError(what, false), attempts_(std::move(attempts)) {}

    const std::vector<std::string>& attempts() const noexcept { return attempts_; }

private:
    std::vector<std::string> attempts_;
};

/// Operation not allowed in the run's current state (e.g. resuming a run that is not paused).
class StateConflictError : public Error {
public:
    using Error::Error;
};

/// A persisted transcript is missing, corrupt, or has a sequence gap.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, long long seq) : Error(what), seq_(seq) {}

    long long seq() const noexcept { return seq_; }

private:
    long long seq_;
};

/// The sandbox itself could not run (spawn failure), as opposed to a failing test.
class SandboxError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

} // namespace agentkernel
