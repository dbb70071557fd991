#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "prefine/gateway/backend.hpp"

namespace prefine::gateway {

struct HttpBackendConfig {
    std::string id = "http";
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "PREFINE_API_KEY";
    int connect_timeout_s = 10;
    int read_timeout_s = 300;
};

// Request body for an OpenAI-style chat-completions endpoint. Sentinel
// lines are stripped from every message.
nlohmann::json to_wire(const ChatRequest& request, const std::string& model);

// Parses a chat-completions response body. Throws MalformedResponse.
ChatResponse from_wire(const nlohmann::json& body);

// Live backend over HTTP(S). Network errors, 429 and 5xx are transient;
// a 400 mentioning the context length becomes ContextOverflow.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    const std::string& id() const override { return config_.id; }
    bool is_live() const override { return true; }
    ChatResponse send(const ChatRequest& request) override;

    const HttpBackendConfig& config() const noexcept { return config_; }

private:
    HttpBackendConfig config_;
};

}  // namespace prefine::gateway
