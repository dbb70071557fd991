#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "prefine/gateway/chat.hpp"

namespace prefine::gateway {

// Content-addressed response store: <root>/<key[0:2]>/<key>.resp holds the
// raw response text, the sibling .meta file holds usage and request metadata.
// Writes go through a temp file and a rename so readers never see a
// partial entry.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path response_path(const std::string& key) const;
    std::filesystem::path meta_path(const std::string& key) const;

    std::optional<ChatResponse> get(const std::string& key) const;
    void put(const std::string& key, const ChatRequest& request, const ChatResponse& response);

    struct Stats {
        std::size_t entries = 0;
        std::uintmax_t bytes = 0;
    };
    Stats stats() const;
    // Removes every entry; returns how many were removed.
    std::size_t clear();

private:
    std::filesystem::path root_;
};

}  // namespace prefine::gateway
