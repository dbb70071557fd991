#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace prefine::util {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// First 8 bytes of the SHA-256 digest as an integer; used to seed
// deterministic generators from content.
std::uint64_t sha256_u64(std::string_view data);

}  // namespace prefine::util
