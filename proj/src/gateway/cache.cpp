#include "prefine/gateway/cache.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "prefine/errors.hpp"
#include "prefine/util/fs.hpp"

namespace fs = std::filesystem;

namespace prefine::gateway {

using util::read_file;

ResponseCache::ResponseCache(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
}

fs::path ResponseCache::response_path(const std::string& key) const {
    return root_ / key.substr(0, 2) / (key + ".resp");
}

fs::path ResponseCache::meta_path(const std::string& key) const {
    return root_ / key.substr(0, 2) / (key + ".meta");
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
    auto rp = response_path(key);
    std::error_code ec;
    if (!fs::exists(rp, ec)) return std::nullopt;
    ChatResponse r;
    r.text = read_file(rp);
    r.from_cache = true;
    auto mp = meta_path(key);
    if (fs::exists(mp, ec)) {
        auto meta = nlohmann::json::parse(read_file(mp), nullptr, false);
        if (meta.is_object()) {
            r.prompt_tokens = meta.value("promptTokens", 0);
            r.completion_tokens = meta.value("completionTokens", 0);
        }
    }
    return r;
}

void ResponseCache::put(const std::string& key, const ChatRequest& request,
                        const ChatResponse& response) {
    fs::create_directories(response_path(key).parent_path());
    nlohmann::json meta = {
        {"key", key},
        {"backend", request.backend},
        {"seed", request.seed},
        {"temperature", request.temperature},
        {"promptTokens", response.prompt_tokens},
        {"completionTokens", response.completion_tokens},
        {"storedAt", util::utc_now()},
    };
    // Meta first: an entry counts as present once its .resp exists.
    util::write_file_atomic(meta_path(key), meta.dump(2));
    util::write_file_atomic(response_path(key), response.text);
}

ResponseCache::Stats ResponseCache::stats() const {
    Stats s;
    std::error_code ec;
    if (!fs::exists(root_, ec)) return s;
    for (const auto& e : fs::recursive_directory_iterator(root_)) {
        if (!e.is_regular_file()) continue;
        s.bytes += e.file_size();
        if (e.path().extension() == ".resp") ++s.entries;
    }
    return s;
}

std::size_t ResponseCache::clear() {
    std::size_t n = stats().entries;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(root_, ec)) fs::remove_all(e.path());
    return n;
}

}  // namespace prefine::gateway
