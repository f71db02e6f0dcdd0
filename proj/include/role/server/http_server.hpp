#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "role/server/platform.hpp"

namespace role::server {

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;  // 0 picks a free port
    int threads = 2;
    std::optional<std::filesystem::path> access_log;  // Combined Log Format
    std::optional<std::filesystem::path> static_dir;  // served for non-API paths
};

// Appends one Combined Log Format line per request.
class AccessLogWriter {
public:
    explicit AccessLogWriter(const std::filesystem::path& path);
    void write(const std::string& line);

private:
    std::mutex mutex_;
    std::ofstream out_;
};

// HTTP front end: /api/... goes to the platform, /rt upgrades to the realtime
// channel, anything else is served from the static directory.
class HttpServer {
public:
    HttpServer(Platform& platform, ServerOptions options);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds and starts the worker threads; returns the bound port.
    std::uint16_t start();
    void stop();
    // Blocks until stop() is called from another thread or a signal handler.
    void wait();

    std::uint16_t port() const noexcept { return port_; }

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
    std::uint16_t port_ = 0;
};

}  // namespace role::server
