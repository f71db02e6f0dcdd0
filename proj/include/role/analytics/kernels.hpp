#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "role/analytics/access_log.hpp"
#include "role/analytics/filters.hpp"
#include "role/analytics/operations.hpp"

namespace role::analytics {

// serial is the reference; parallel splits work across OpenMP threads and
// must produce identical results.
enum class Execution { serial, parallel };

struct ExecutionPolicy {
    Execution mode = Execution::parallel;
    int threads = 0;  // 0 = OpenMP default
};

struct ParsedLog {
    std::vector<AccessLogEntry> entries;
    std::uint64_t malformed = 0;
};

ParsedLog parse_entries(const LogInput& input, ExecutionPolicy policy = {});

struct CleanResult {
    std::vector<AccessLogEntry> kept;
    std::uint64_t bots = 0;
    std::uint64_t partners = 0;
    std::uint64_t static_content = 0;
};

CleanResult clean(const std::vector<AccessLogEntry>& entries, const Filters& filters, ExecutionPolicy policy = {});

inline std::vector<AccessLogEntry> clean(const std::vector<AccessLogEntry>& entries, const BotPatterns& bots,
                                         const PartnerSet& partners) {
    return clean(entries, Filters{bots, partners}, {Execution::serial, 0}).kept;
}

struct DayStats {
    std::uint64_t requests = 0;
    std::uint64_t bytes = 0;
    std::set<std::string> ips;
};

std::map<std::int64_t, DayStats> daily_stats(const std::vector<AccessLogEntry>& entries, ExecutionPolicy policy = {});

struct GeoStats {
    std::uint64_t requests = 0;
    std::set<std::string> ips;
};

struct GeoSummary {
    std::map<std::pair<std::string, std::string>, GeoStats> cities;  // (country, city)
    std::map<std::string, GeoStats> countries;
};

GeoSummary geo_summary(const std::vector<AccessLogEntry>& entries, const GeoTable& geo, ExecutionPolicy policy = {});

ExtractResult extract_operations(const std::vector<AccessLogEntry>& cleaned, ExecutionPolicy policy);

}  // namespace role::analytics
