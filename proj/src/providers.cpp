#include "agentkernel/providers.hpp"

#include <cstdlib>
#include <thread>

#include "agentkernel/error.hpp"

namespace agentkernel {

void ChatMessage::validate() const {
    bool structured = !tool_calls.is_null() || role == Role::tool;
    if (content.empty() && !structured) {
        throw ValidationError("chat message content must be non-empty");
    }
}

void to_json(json& j, const ChatMessage& m) {
    j = json{{"role", m.role}, {"content", m.content}};
    if (m.name) j["name"] = *m.name;
    if (!m.tool_calls.is_null()) j["tool_calls"] = m.tool_calls;
    if (m.tool_call_id) j["tool_call_id"] = *m.tool_call_id;
}

void from_json(const json& j, ChatMessage& m) {
    m.role = j.at("role").get<Role>();
    const auto& content = j.at("content");
    m.content = content.is_null() ? std::string{} : content.get<std::string>();
    if (j.contains("name")) m.name = j["name"].get<std::string>();
    m.tool_calls = j.contains("tool_calls") ? j["tool_calls"] : json();
    if (j.contains("tool_call_id")) m.tool_call_id = j["tool_call_id"].get<std::string>();
}

void CompletionRequest::validate() const {
    if (messages.empty()) throw ValidationError("completion request has no messages");
    auto first = messages.front().role;
    if (first != Role::system && first != Role::user) {
        throw ValidationError("first message must have role system or user");
    }
    if (temperature < 0.0) throw ValidationError("temperature must be >= 0");
    if (max_tokens && *max_tokens < 1) throw ValidationError("max_tokens must be positive");
    for (const auto& m : messages) m.validate();
}

json to_wire(const CompletionRequest& request) {
    json body{{"model", request.model},
              {"messages", request.messages},
              {"temperature", request.temperature}};
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
    if (request.tools) body["tools"] = *request.tools;
    return body;
}

// -- scripted -----------------------------------------------------------------

ScriptedProvider::ScriptedProvider(std::vector<Entry> entries) {
    for (auto& e : entries) queues_[e.match_key].push_back(std::move(e.response));
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(const json& script) {
    const json& list = script.is_object() ? script.at("entries") : script;
    if (!list.is_array()) throw ConfigError("script must be a list of entries");
    std::vector<Entry> entries;
    for (const auto& item : list) {
        entries.push_back({item.value("agent", std::string(wildcard)),
                           item.at("response").get<std::string>()});
    }
    return std::make_shared<ScriptedProvider>(std::move(entries));
}

ChatMessage ScriptedProvider::complete(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    std::string key = queues_.count(request.agent) ? request.agent : std::string(wildcard);
    auto q = queues_.find(key);
    std::size_t& cursor = cursors_[key];
    if (q == queues_.end() || cursor >= q->second.size()) {
        throw ScriptExhaustedError(request.agent, cursor);
    }
    const std::string& response = q->second[cursor++];
    calls_.push_back({request.agent, request.messages, response});
    return ChatMessage{Role::assistant, response, request.agent, json(), std::nullopt};
}

std::vector<ScriptedProvider::Call> ScriptedProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t ScriptedProvider::remaining(const std::string& agent) const {
    std::lock_guard lock(mutex_);
    auto q = queues_.find(agent);
    if (q == queues_.end()) return 0;
    auto c = cursors_.find(agent);
    std::size_t used = c == cursors_.end() ? 0 : c->second;
    return q->second.size() - used;
}

// -- retry --------------------------------------------------------------------

ChatMessage with_retry(Provider& provider, const CompletionRequest& request,
                       const RetryPolicy& policy) {
    if (policy.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    std::vector<std::string> outcomes;
    auto delay = policy.base_delay;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        try {
            return provider.complete(request);
        } catch (const ProviderError& e) {
            if (!e.retryable()) throw;
            outcomes.push_back("attempt " + std::to_string(attempt + 1) + ": " + e.what());
        }
        if (attempt == policy.max_retries) break;
        if (policy.sleep) policy.sleep(delay);
        else std::this_thread::sleep_for(delay);
        delay *= 2;
    }
    std::string message = "provider failed after " + std::to_string(outcomes.size()) + " attempt(s)";
    for (const auto& o : outcomes) message += "; " + o;
    throw RetryExhaustedError(message, std::move(outcomes));
}

// -- OpenAI-compatible ----------------------------------------------------------

ChatMessage parse_completion_response(const std::string& body) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty() || !parsed["choices"][0].contains("message")) {
        throw ProviderError("malformed chat-completions response", false);
    }
    const json& msg = parsed["choices"][0]["message"];
    ChatMessage out;
    out.role = Role::assistant;
    if (msg.contains("content") && msg["content"].is_string()) {
        out.content = msg["content"].get<std::string>();
    }
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty()) {
        out.tool_calls = msg["tool_calls"];
    }
    return out;
}

OpenAICompatibleProvider::OpenAICompatibleProvider(OpenAIConfig config,
                                                   std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.api_key.empty()) {
        if (const char* key = std::getenv("AGENTKERNEL_API_KEY")) config_.api_key = key;
    }
    if (!transport_) transport_ = make_http_transport(config_.base_url, config_.timeout);
}

ChatMessage OpenAICompatibleProvider::complete(const CompletionRequest& request) {
    CompletionRequest wire = request;
    if (wire.model.empty() || wire.model == "scripted") wire.model = config_.model;
    if (!config_.function_calling) wire.tools.reset();
    wire.validate();

    std::vector<std::pair<std::string, std::string>> headers{{"Content-Type", "application/json"}};
    if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

    HttpResponse response = transport_->post("/chat/completions", headers, to_wire(wire).dump());
    if (response.status == 200) return parse_completion_response(response.body);

    std::string detail = "HTTP " + std::to_string(response.status) + ": " +
                         response.body.substr(0, 200);
    bool retryable = response.status == 429 || response.status >= 500;
    throw ProviderError(detail, retryable, response.status);
}

// -- client -------------------------------------------------------------------

LlmClient::LlmClient(std::shared_ptr<Provider> provider, ClientOptions options)
    : provider_(std::move(provider)), options_(std::move(options)) {
    if (!provider_) throw ConfigError("LlmClient requires a provider");
}

ChatMessage LlmClient::ask(const std::string& agent, std::vector<ChatMessage> messages,
                           std::optional<json> tools) const {
    CompletionRequest request;
    request.messages = std::move(messages);
    request.model = options_.model;
    request.temperature = options_.temperature;
    request.max_tokens = options_.max_tokens;
    if (options_.function_calling) request.tools = std::move(tools);
    request.agent = agent;
    request.validate();

    ChatMessage reply = with_retry(*provider_, request, options_.retry);
    reply.role = Role::assistant;
    if (!reply.name) reply.name = agent;
    if (observer_) observer_(request, reply);
    return reply;
}

LlmClient LlmClient::with_observer(Observer observer) const {
    LlmClient copy = *this;
    copy.observer_ = std::move(observer);
    return copy;
}

} // namespace agentkernel
