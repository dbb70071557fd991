#pragma once

#include <filesystem>
#include <string>

namespace prefine::util {

// Whole file as bytes. Throws Error("IoError") when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes through a sibling temp file and renames it into place, so readers
// never observe a half-written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);

// ISO-8601 UTC timestamp, second resolution.
std::string utc_now();

}  // namespace prefine::util
