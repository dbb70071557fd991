#include "prefine/gateway/http_backend.hpp"

#include <chrono>
#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "prefine/errors.hpp"
#include "prefine/util/text.hpp"

namespace prefine::gateway {

nlohmann::json to_wire(const ChatRequest& request, const std::string& model) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : request.messages) {
        msgs.push_back({{"role", std::string(to_string(m.role))},
                        {"content", strip_sentinels(m.content)}});
    }
    return {{"model", model},
            {"messages", std::move(msgs)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"seed", request.seed}};
}

ChatResponse from_wire(const nlohmann::json& body) {
    if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array() ||
        body["choices"].empty()) {
        throw MalformedResponse("response has no choices");
    }
    const auto& choice = body["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw MalformedResponse("response choice has no message content");
    }
    ChatResponse r;
    r.text = choice["message"]["content"].get<std::string>();
    if (util::trim(r.text).empty()) throw MalformedResponse("response content is empty");
    if (body.contains("usage") && body["usage"].is_object()) {
        r.prompt_tokens = body["usage"].value("prompt_tokens", 0);
        r.completion_tokens = body["usage"].value("completion_tokens", 0);
    }
    return r;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw InvalidArgument("http backend needs a base URL");
    if (config_.model.empty()) throw InvalidArgument("http backend needs a model name");
}

ChatResponse HttpBackend::send(const ChatRequest& request) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.connect_timeout_s, 0);
    client.set_read_timeout(config_.read_timeout_s, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto body = to_wire(request, config_.model).dump();
    auto started = std::chrono::steady_clock::now();
    auto res = client.Post(config_.path, headers, body, "application/json");
    if (!res) {
        throw TransientBackendError("request to " + config_.base_url + " failed: " +
                                    httplib::to_string(res.error()));
    }
    const int status = res->status;
    if (status == 429 || status >= 500) {
        throw TransientBackendError("backend returned HTTP " + std::to_string(status));
    }
    if (status == 400) {
        auto lower = util::to_lower(res->body);
        if (lower.find("context") != std::string::npos ||
            lower.find("maximum") != std::string::npos) {
            throw ContextOverflow("prompt exceeds the model context: " + res->body);
        }
    }
    if (status != 200) {
        throw MalformedResponse("backend returned HTTP " + std::to_string(status) + ": " +
                                res->body.substr(0, 200));
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw MalformedResponse("response body is not JSON");
    auto out = from_wire(parsed);
    out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    return out;
}

}  // namespace prefine::gateway
