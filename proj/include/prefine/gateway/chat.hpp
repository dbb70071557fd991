#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefine/core/types.hpp"

namespace prefine::gateway {

struct ChatRequest {
    std::string backend;
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
    int max_tokens = 1024;
    long long seed = 42;

    // At least one message, last one from the user, temperature in [0,2],
    // max_tokens > 0. Throws InvalidArgument.
    void validate() const;

    bool operator==(const ChatRequest&) const = default;
};

struct ChatResponse {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    long long latency_ms = 0;
    bool from_cache = false;
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 500;
    double backoff_factor = 2.0;
    int max_delay_ms = 30'000;

    void validate() const;
    // Delay before retry number `retry` (1-based), capped at max_delay_ms.
    int delay_ms(int retry) const;
};

// SHA-256 over a canonical encoding of (backend, messages, temperature,
// max_tokens, seed). Equal requests give equal keys.
std::string cache_key(const ChatRequest& request);

// Sentinel lines tag a prompt with its kind so the mock backend can answer
// it. They are stripped before anything is sent to a live endpoint.
std::string sentinel_line(std::string_view kind);
std::optional<std::string> detect_sentinel(std::string_view text);
std::string strip_sentinels(std::string_view text);

}  // namespace prefine::gateway
