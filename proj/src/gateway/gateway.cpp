#include "prefine/gateway/gateway.hpp"

#include <mutex>
#include <thread>

#include "prefine/errors.hpp"

namespace prefine::gateway {

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
    if (options_.max_concurrency_per_backend < 1 || options_.max_concurrency_per_backend > 1024) {
        throw InvalidArgument("per-backend concurrency must lie in [1,1024]");
    }
    if (!options_.sleep) {
        options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    if (options_.cache_root) cache_.emplace(*options_.cache_root);
}

Gateway::~Gateway() = default;

void Gateway::register_backend(std::shared_ptr<Backend> backend) {
    if (!backend) throw InvalidArgument("cannot register a null backend");
    std::unique_lock lock(mutex_);
    Slot slot{backend, std::make_unique<Semaphore>(options_.max_concurrency_per_backend)};
    backends_.insert_or_assign(backend->id(), std::move(slot));
}

bool Gateway::has_backend(std::string_view id) const {
    std::shared_lock lock(mutex_);
    return backends_.find(id) != backends_.end();
}

std::shared_ptr<Backend> Gateway::backend(std::string_view id) const {
    std::shared_lock lock(mutex_);
    auto it = backends_.find(id);
    if (it == backends_.end()) throw UnknownBackend("no backend registered as '" + std::string(id) + "'");
    return it->second.backend;
}

ChatResponse Gateway::complete(const ChatRequest& request, const RetryPolicy& policy) {
    request.validate();
    policy.validate();

    Backend* backend = nullptr;
    Semaphore* gate = nullptr;
    {
        std::shared_lock lock(mutex_);
        auto it = backends_.find(request.backend);
        if (it == backends_.end()) {
            throw UnknownBackend("no backend registered as '" + request.backend + "'");
        }
        backend = it->second.backend.get();
        gate = it->second.gate.get();
    }

    const std::string key = cache_key(request);
    if (cache_) {
        if (auto hit = cache_->get(key)) {
            cache_hits_.fetch_add(1);
            return *hit;
        }
    }

    std::string last_error;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        try {
            gate->acquire();
            struct Release {
                Semaphore* g;
                ~Release() { g->release(); }
            } release{gate};
            backend_calls_.fetch_add(1);
            if (backend->is_live()) live_calls_.fetch_add(1);
            ChatResponse response = backend->send(request);
            response.from_cache = false;
            if (cache_) cache_->put(key, request, response);
            return response;
        } catch (const TransientBackendError& e) {
            last_error = e.what();
        }
        if (attempt < policy.max_attempts) {
            options_.sleep(std::chrono::milliseconds(policy.delay_ms(attempt)));
        }
    }
    throw BackendUnreachable("backend '" + request.backend + "' failed after " +
                             std::to_string(policy.max_attempts) + " attempts: " + last_error);
}

}  // namespace prefine::gateway
