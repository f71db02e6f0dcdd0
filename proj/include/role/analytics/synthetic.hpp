#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "role/clock.hpp"

namespace role::analytics {

// Parameters of the synthetic access log. Output depends only on these,
// so a seed reproduces the same file on every platform.
struct SyntheticConfig {
    std::uint64_t seed = 42;
    std::size_t entries = 10000;
    int days = 30;
    int users = 400;
    int spaces = 150;
    Timestamp start = 1325376000000;  // 2012-01-01T00:00:00Z
    std::vector<std::string> widgets;  // widget ids to draw from
};

// Combined Log Format lines mixing human traffic with bots, partner
// addresses, static files, page views, failed and malformed requests.
std::vector<std::string> generate_log(const SyntheticConfig& config);

}  // namespace role::analytics
