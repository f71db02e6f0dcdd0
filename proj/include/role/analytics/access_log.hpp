#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "role/clock.hpp"
#include "role/event_log.hpp"

namespace role::analytics {

// One request of the platform's HTTP access log.
struct AccessLogEntry {
    std::string ip;
    Timestamp ts = 0;
    std::string method;
    std::string target;  // path plus optional query
    int status = 0;
    std::uint64_t bytes = 0;
    std::string user_agent;
    bool operator==(const AccessLogEntry&) const = default;

    std::string_view path() const;
    std::optional<std::string> query_param(std::string_view key) const;
};

// Combined Log Format; nullopt for lines that do not parse.
std::optional<AccessLogEntry> parse_clf_line(std::string_view line);

// Formats a line that parse_clf_line reads back (UTC offset +0000).
std::string format_clf_line(const AccessLogEntry& e);

// Synthesizes the API request a logged platform event stands for.
AccessLogEntry event_to_entry(const ActivityEvent& e);

enum class LogFormat { combined, event_lines };

struct LogInput {
    LogFormat format = LogFormat::combined;
    std::vector<std::string> lines;
};

// Reads raw lines and detects the format from the first non-blank line.
LogInput read_log_lines(std::istream& in);

std::string url_decode(std::string_view s);

}  // namespace role::analytics
