#include "prefine/gateway/backend.hpp"

#include "prefine/core/tokenizer.hpp"
#include "prefine/errors.hpp"

namespace prefine::gateway {

ScriptedBackend::ScriptedBackend(std::string id, Script script, bool live)
    : id_(std::move(id)), script_(std::move(script)), live_(live) {
    if (!script_) throw InvalidArgument("scripted backend '" + id_ + "' has no script");
}

ChatResponse ScriptedBackend::send(const ChatRequest& request) {
    calls_.fetch_add(1);
    ChatResponse r;
    r.text = script_(request);
    r.completion_tokens = static_cast<int>(approx_token_count(r.text));
    return r;
}

}  // namespace prefine::gateway
