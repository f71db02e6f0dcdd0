#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>

#include "json.hpp"
#include "role/catalog.hpp"
#include "role/error.hpp"

namespace role::testing {

inline std::filesystem::path data_dir() { return ROLE_DATA_DIR; }

inline std::filesystem::path default_catalog_path() { return data_dir() / "default_catalog.json"; }

inline nlohmann::json default_catalog_doc() {
    std::ifstream in(default_catalog_path());
    return nlohmann::json::parse(in);
}

inline Catalog default_catalog() { return load_catalog(default_catalog_path()); }

// Error code thrown by `f`, or nullopt if it returned normally.
template <class F>
std::optional<ErrorCode> error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("role-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace role::testing
