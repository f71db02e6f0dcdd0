#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "role/analytics/access_log.hpp"

namespace role::analytics {

// User-agent patterns identifying automated agents. Plain lines match as
// case-insensitive substrings, "re:" lines as case-insensitive regexes.
class BotPatterns {
public:
    static BotPatterns parse(std::istream& in);
    static BotPatterns load(const std::filesystem::path& path);

    bool matches(std::string_view user_agent) const;
    bool empty() const noexcept { return substrings_.empty() && regexes_.empty(); }

private:
    std::vector<std::string> substrings_;  // lower-cased
    std::vector<std::regex> regexes_;
};

std::optional<std::uint32_t> parse_ipv4(std::string_view s);

// IPv4 addresses and CIDR blocks of partner institutions, plus "id:" lines
// for exact non-IP actor names.
class PartnerSet {
public:
    static PartnerSet parse(std::istream& in);
    static PartnerSet load(const std::filesystem::path& path);

    bool contains(std::string_view ip) const;
    bool empty() const noexcept { return blocks_.empty() && ids_.empty(); }

private:
    std::vector<std::pair<std::uint32_t, int>> blocks_;
    std::set<std::string, std::less<>> ids_;
};

struct GeoRecord {
    std::string city;
    std::string country;
    bool operator==(const GeoRecord&) const = default;
};

inline const GeoRecord unknown_geo{"unknown", "unknown"};

// Offline CIDR table ("prefix,city,country" lines), longest prefix wins.
class GeoTable {
public:
    static GeoTable parse(std::istream& in);
    static GeoTable load(const std::filesystem::path& path);

    const GeoRecord& lookup(std::string_view ip) const;
    std::size_t size() const noexcept;

private:
    std::array<std::map<std::uint32_t, GeoRecord>, 33> by_length_;
};

enum class Removal : std::uint8_t { kept, bot, partner, static_content };

bool is_static_path(std::string_view path);

struct Filters {
    BotPatterns bots;
    PartnerSet partners;

    // First matching reason in the order bot, partner, static content.
    Removal verdict(const AccessLogEntry& e) const;
};

}  // namespace role::analytics
