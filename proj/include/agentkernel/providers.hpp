#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentkernel/types.hpp"

namespace agentkernel {

enum class Role { system, user, assistant, tool };
NLOHMANN_JSON_SERIALIZE_ENUM(Role, {{Role::system, "system"},
                                    {Role::user, "user"},
                                    {Role::assistant, "assistant"},
                                    {Role::tool, "tool"}})

struct ChatMessage {
    Role role = Role::user;
    std::string content;
    std::optional<std::string> name;
    /// Structured function calls returned by a backend (wire format `tool_calls`), or null.
    json tool_calls;
    std::optional<std::string> tool_call_id;

    void validate() const;
    bool operator==(const ChatMessage&) const = default;
};

void to_json(json& j, const ChatMessage& m);
void from_json(const json& j, ChatMessage& m);

struct CompletionRequest {
    std::vector<ChatMessage> messages;
    std::string model;
    double temperature = 0.0;
    std::optional<int> max_tokens;
    /// Function schemas in wire format; absent for plain completions.
    std::optional<json> tools;
    /// Requesting agent. Routing key for scripted providers; never sent over the wire.
    std::string agent;

    void validate() const;
};

/// Chat-completions request body (model, messages, temperature, ...).
json to_wire(const CompletionRequest& request);

/// A model backend. Implementations must be safe for concurrent calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatMessage complete(const CompletionRequest& request) = 0;
};

/// Deterministic provider that replays canned responses keyed by agent name.
///
/// An agent with at least one keyed entry consumes only its own entries.
/// Agents without keyed entries fall back to the shared wildcard ("*") queue.
/// Running out of entries is an error, never a silent recycle.
class ScriptedProvider : public Provider {
public:
    static constexpr const char* wildcard = "*";

    struct Entry {
        std::string match_key;
        std::string response;
    };

    struct Call {
        std::string agent;
        std::vector<ChatMessage> messages;
        std::string response;
    };

    explicit ScriptedProvider(std::vector<Entry> entries);

    /// Accepts `[{"agent": ..., "response": ...}, ...]` or `{"entries": [...]}`.
    static std::shared_ptr<ScriptedProvider> from_json(const json& script);

    ChatMessage complete(const CompletionRequest& request) override;

    std::vector<Call> calls() const;
    std::size_t remaining(const std::string& agent) const;

private:
    std::map<std::string, std::vector<std::string>> queues_;
    std::map<std::string, std::size_t> cursors_;
    std::vector<Call> calls_;
    mutable std::mutex mutex_;
};

/// Provider backed by a callable; handy for fakes in tests.
class FunctionProvider : public Provider {
public:
    using Fn = std::function<ChatMessage(const CompletionRequest&)>;
    explicit FunctionProvider(Fn fn) : fn_(std::move(fn)) {}
    ChatMessage complete(const CompletionRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds base_delay{500};
    /// Injected so tests can observe delays without sleeping.
    std::function<void(std::chrono::milliseconds)> sleep;
};

/// Calls `provider` at most `max_retries + 1` times, doubling the delay after each
/// retryable failure. Non-retryable failures propagate immediately.
ChatMessage with_retry(Provider& provider, const CompletionRequest& request,
                       const RetryPolicy& policy);

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal POST transport so the wire client can be exercised without a network.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    /// Throws ProviderError (retryable) on connection failure or timeout.
    virtual HttpResponse post(const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              const std::string& body) = 0;
};

/// cpp-httplib transport rooted at `base_url` (scheme://host[:port][/prefix]).
std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::seconds timeout);

struct OpenAIConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4-0613";
    /// Read from AGENTKERNEL_API_KEY when empty.
    std::string api_key;
    std::chrono::seconds timeout{120};
    bool function_calling = true;
};

/// Client for the OpenAI-compatible `POST {base_url}/chat/completions` protocol.
class OpenAICompatibleProvider : public Provider {
public:
    OpenAICompatibleProvider(OpenAIConfig config, std::shared_ptr<HttpTransport> transport);

    ChatMessage complete(const CompletionRequest& request) override;
    const OpenAIConfig& config() const { return config_; }

private:
    OpenAIConfig config_;
    std::shared_ptr<HttpTransport> transport_;
};

/// Parse the first choice of a chat-completions response body.
ChatMessage parse_completion_response(const std::string& body);

struct ClientOptions {
    std::string model = "scripted";
    double temperature = 0.0;
    std::optional<int> max_tokens;
    RetryPolicy retry;
    /// When false, tool schemas are withheld and the text protocol is used.
    bool function_calling = false;
};

/// Value-type handle used by the stages to talk to a model on behalf of an agent.
/// Every call is reported to the observer (the kernel logs them as events).
class LlmClient {
public:
    using Observer = std::function<void(const CompletionRequest&, const ChatMessage&)>;

    LlmClient(std::shared_ptr<Provider> provider, ClientOptions options = {});

    ChatMessage ask(const std::string& agent, std::vector<ChatMessage> messages,
                    std::optional<json> tools = std::nullopt) const;

    LlmClient with_observer(Observer observer) const;
    const ClientOptions& options() const { return options_; }
    bool function_calling() const { return options_.function_calling; }

private:
    std::shared_ptr<Provider> provider_;
    ClientOptions options_;
    Observer observer_;
};

} // namespace agentkernel
