#include "prefine/gateway/setup.hpp"

#include "prefine/errors.hpp"
#include "prefine/gateway/http_backend.hpp"
#include "prefine/gateway/mock_backend.hpp"

namespace prefine::gateway {

std::unique_ptr<Gateway> make_gateway(const BackendSetup& setup) {
    if (setup.kind != "mock" && setup.kind != "http") {
        throw InvalidArgument("unknown backend '" + setup.kind + "' (expected mock or http)");
    }
    if (setup.kind == "http" && (setup.url.empty() || setup.model.empty())) {
        throw InvalidArgument("the http backend needs --url and --model");
    }
    // Checked first: building the gateway creates the cache directory.
    GatewayOptions options;
    options.cache_root = setup.cache;
    options.max_concurrency_per_backend = setup.concurrency;
    auto gw = std::make_unique<Gateway>(options);
    if (setup.kind == "mock") {
        gw->register_backend(std::make_shared<MockBackend>("mock"));
    } else {
        HttpBackendConfig c;
        c.base_url = setup.url;
        c.model = setup.model;
        gw->register_backend(std::make_shared<HttpBackend>(c));
    }
    return gw;
}

}  // namespace prefine::gateway
