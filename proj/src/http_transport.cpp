#include <httplib.h>

#include "agentkernel/error.hpp"
#include "agentkernel/providers.hpp"

namespace agentkernel {

namespace {

class HttplibTransport : public HttpTransport {
public:
    HttplibTransport(const std::string& base_url, std::chrono::seconds timeout)
        : timeout_(timeout) {
        // Split "scheme://host[:port]" from an optional path prefix such as "/v1".
        auto scheme_end = base_url.find("://");
        auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        auto path_start = base_url.find('/', host_start);
        origin_ = base_url.substr(0, path_start);
        if (path_start != std::string::npos) prefix_ = base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    HttpResponse post(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      const std::string& body) override {
        httplib::Client client(origin_);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);

        httplib::Headers h;
        std::string content_type = "application/json";
        for (const auto& [k, v] : headers) {
            if (k == "Content-Type") content_type = v;
            else h.emplace(k, v);
        }
        auto result = client.Post(prefix_ + path, h, body, content_type);
        if (!result) {
            throw ProviderError("transport failure: " + httplib::to_string(result.error()), true);
        }
        return {result->status, result->body};
    }

private:
    std::string origin_;
    std::string prefix_;
    std::chrono::seconds timeout_;
};

} // namespace

std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::seconds timeout) {
    return std::make_shared<HttplibTransport>(base_url, timeout);
}

} // namespace agentkernel
