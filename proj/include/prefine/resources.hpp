#pragma once

#include <span>
#include <string_view>

// Files compiled into the library at build time.
namespace prefine::resources {

struct Resource {
    std::string_view name;
    std::string_view content;
};

std::span<const Resource> templates();
std::span<const Resource> samples();

}  // namespace prefine::resources
