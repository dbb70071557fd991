#include "prefine/gateway/chat.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "prefine/errors.hpp"
#include "prefine/util/hash.hpp"
#include "prefine/util/text.hpp"

namespace prefine::gateway {

namespace {
constexpr std::string_view kSentinelOpen = "[[prefine:kind=";
constexpr std::string_view kSentinelClose = "]]";
}  // namespace

void ChatRequest::validate() const {
    if (backend.empty()) throw InvalidArgument("chat request names no backend");
    if (messages.empty()) throw InvalidArgument("chat request has no messages");
    if (messages.back().role != Role::User) {
        throw InvalidArgument("last chat message must come from the user");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw InvalidArgument("temperature must lie in [0,2]");
    }
    if (max_tokens <= 0) throw InvalidArgument("max_tokens must be positive");
}

void RetryPolicy::validate() const {
    if (max_attempts < 1) throw InvalidArgument("retry policy needs at least one attempt");
    if (base_delay_ms < 0 || max_delay_ms < 0) throw InvalidArgument("negative retry delay");
    if (backoff_factor < 1.0) throw InvalidArgument("backoff factor must be >= 1");
}

int RetryPolicy::delay_ms(int retry) const {
    if (retry < 1) return 0;
    double d = base_delay_ms * std::pow(backoff_factor, retry - 1);
    return static_cast<int>(std::min<double>(d, max_delay_ms));
}

std::string cache_key(const ChatRequest& request) {
    nlohmann::json j;
    j["backend"] = request.backend;
    auto& msgs = j["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages) {
        msgs.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
    // Temperatures are hashed at fixed precision so 0.7 and 0.70000000001
    // do not silently diverge across platforms.
    j["temperature"] = std::llround(request.temperature * 1e6);
    j["maxTokens"] = request.max_tokens;
    j["seed"] = request.seed;
    return util::sha256_hex(j.dump());
}

std::string sentinel_line(std::string_view kind) {
    return std::string(kSentinelOpen) + std::string(kind) + std::string(kSentinelClose);
}

std::optional<std::string> detect_sentinel(std::string_view text) {
    auto pos = text.rfind(kSentinelOpen);
    if (pos == std::string_view::npos) return std::nullopt;
    auto start = pos + kSentinelOpen.size();
    auto end = text.find(kSentinelClose, start);
    if (end == std::string_view::npos) return std::nullopt;
    return std::string(text.substr(start, end - start));
}

std::string strip_sentinels(std::string_view text) {
    std::vector<std::string> kept;
    for (auto& line : util::split_lines(text)) {
        auto t = util::trim(line);
        if (util::istarts_with(t, kSentinelOpen) && t.size() >= kSentinelClose.size() &&
            t.substr(t.size() - kSentinelClose.size()) == kSentinelClose) {
            continue;
        }
        kept.push_back(line);
    }
    while (!kept.empty() && util::trim(kept.back()).empty()) kept.pop_back();
    return util::join(kept, "\n");
}

}  // namespace prefine::gateway
