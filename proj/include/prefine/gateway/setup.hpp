#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "prefine/gateway/gateway.hpp"

namespace prefine::gateway {

// Backend choice shared by the command-line tools.
struct BackendSetup {
    std::string kind = "mock";  // "mock" or "http"
    std::string url;            // http only
    std::string model;          // http only
    std::optional<std::filesystem::path> cache;
    std::ptrdiff_t concurrency = 4;
};

// Registers one backend whose id equals `kind`. Throws InvalidArgument for
// an unknown kind or an http setup without url and model.
std::unique_ptr<Gateway> make_gateway(const BackendSetup& setup);

}  // namespace prefine::gateway
