#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>

#include "prefine/gateway/backend.hpp"
#include "prefine/gateway/cache.hpp"

namespace prefine::gateway {

struct GatewayOptions {
    std::optional<std::filesystem::path> cache_root;
    std::ptrdiff_t max_concurrency_per_backend = 4;
    // Injected so tests can observe backoff without sleeping.
    std::function<void(std::chrono::milliseconds)> sleep;
};

// Routes requests to registered backends with caching, bounded
// concurrency and retry on transient failures.
class Gateway {
public:
    explicit Gateway(GatewayOptions options = {});
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    void register_backend(std::shared_ptr<Backend> backend);
    bool has_backend(std::string_view id) const;
    std::shared_ptr<Backend> backend(std::string_view id) const;

    // Cache hit returns without touching the backend. Otherwise the backend
    // is called up to policy.max_attempts times; exhaustion raises
    // BackendUnreachable. Non-transient errors propagate at once.
    ChatResponse complete(const ChatRequest& request, const RetryPolicy& policy = {});

    std::uint64_t backend_calls() const noexcept { return backend_calls_.load(); }
    std::uint64_t live_calls() const noexcept { return live_calls_.load(); }
    std::uint64_t cache_hits() const noexcept { return cache_hits_.load(); }
    const ResponseCache* cache() const noexcept { return cache_ ? &*cache_ : nullptr; }

private:
    using Semaphore = std::counting_semaphore<1024>;
    struct Slot {
        std::shared_ptr<Backend> backend;
        std::unique_ptr<Semaphore> gate;
    };

    GatewayOptions options_;
    std::optional<ResponseCache> cache_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, Slot, std::less<>> backends_;
    std::atomic<std::uint64_t> backend_calls_{0};
    std::atomic<std::uint64_t> live_calls_{0};
    std::atomic<std::uint64_t> cache_hits_{0};
};

}  // namespace prefine::gateway
