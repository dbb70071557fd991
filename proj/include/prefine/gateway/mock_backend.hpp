#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "prefine/gateway/backend.hpp"

namespace prefine::gateway {

struct MockFixtures {
    // prompt kind -> fixed response text
    std::map<std::string, std::string> overrides;
    // prompt kind -> number of transient failures before each distinct
    // request succeeds
    std::map<std::string, int> transient_failures;
    // answer for prompts that carry no kind sentinel
    std::optional<std::string> default_response;

    // JSON file: {"overrides": {...}, "transientFailures": {...}, "default": "..."}
    static MockFixtures load(const std::filesystem::path& path);
};

// The deterministic answer the mock gives for a request, with no fixtures.
// Output depends only on the request. Throws UnknownPromptKind.
std::string mock_generate(const ChatRequest& request);

// Prompt kind named by the sentinel in the last user message.
std::optional<std::string> request_kind(const ChatRequest& request);

class MockBackend : public Backend {
public:
    explicit MockBackend(std::string id = "mock", MockFixtures fixtures = {});

    const std::string& id() const override { return id_; }
    bool is_live() const override { return false; }
    ChatResponse send(const ChatRequest& request) override;

private:
    std::string id_;
    MockFixtures fixtures_;
    std::mutex mutex_;
    std::map<std::string, int> failures_served_;
};

}  // namespace prefine::gateway
