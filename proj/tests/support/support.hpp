#pragma once

#include <filesystem>
#include <string>

namespace prefine::testing {

std::filesystem::path source_dir();
std::string read_text(const std::filesystem::path& path);
std::string read_test_data(const std::string& name);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "prefine");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

}  // namespace prefine::testing
