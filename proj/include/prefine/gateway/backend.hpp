#pragma once

#include <atomic>
#include <functional>
#include <string>

#include "prefine/gateway/chat.hpp"

namespace prefine::gateway {

// One chat-completion provider. Implementations must be safe to call from
// several threads at once. Failures worth retrying are reported as
// TransientBackendError; everything else propagates unchanged.
class Backend {
public:
    virtual ~Backend() = default;

    virtual const std::string& id() const = 0;
    virtual bool is_live() const = 0;
    virtual ChatResponse send(const ChatRequest& request) = 0;
};

// Backend driven by a caller-supplied function; used for scripted judges
// and failure injection in tests.
class ScriptedBackend : public Backend {
public:
    using Script = std::function<std::string(const ChatRequest&)>;

    ScriptedBackend(std::string id, Script script, bool live = false);

    const std::string& id() const override { return id_; }
    bool is_live() const override { return live_; }
    ChatResponse send(const ChatRequest& request) override;

    std::size_t calls() const noexcept { return calls_.load(); }

private:
    std::string id_;
    Script script_;
    bool live_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace prefine::gateway
