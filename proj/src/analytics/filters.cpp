#include "role/analytics/filters.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "role/error.hpp"

namespace role::analytics {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(std::string_view what, int line, std::string_view detail) {
    throw Error(ErrorCode::config_parse_error,
                std::string(what) + " line " + std::to_string(line) + ": " + std::string(detail));
}

// Calls fn(line_no, text) for every non-blank, non-comment line.
template <typename Fn>
void for_config_lines(std::istream& in, Fn fn) {
    std::string raw;
    int n = 0;
    while (std::getline(in, raw)) {
        ++n;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        fn(n, line);
    }
}

std::ifstream open_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config_parse_error, "cannot open " + path.string());
    return in;
}

std::optional<std::pair<std::uint32_t, int>> parse_cidr(std::string_view s) {
    const auto slash = s.find('/');
    const auto addr = parse_ipv4(s.substr(0, slash));
    if (!addr) return std::nullopt;
    int len = 32;
    if (slash != std::string_view::npos) {
        const auto bits = s.substr(slash + 1);
        auto [p, ec] = std::from_chars(bits.data(), bits.data() + bits.size(), len);
        if (ec != std::errc{} || p != bits.data() + bits.size() || len < 0 || len > 32) return std::nullopt;
    }
    const std::uint32_t mask = len == 0 ? 0 : ~std::uint32_t{0} << (32 - len);
    return std::pair{*addr & mask, len};
}

}  // namespace

std::optional<std::uint32_t> parse_ipv4(std::string_view s) {
    std::uint32_t out = 0;
    for (int i = 0; i < 4; ++i) {
        const auto dot = i < 3 ? s.find('.') : s.size();
        if (dot == std::string_view::npos || dot == 0 || dot > 3) return std::nullopt;
        unsigned octet = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + dot, octet);
        if (ec != std::errc{} || p != s.data() + dot || octet > 255) return std::nullopt;
        out = out << 8 | octet;
        s.remove_prefix(i < 3 ? dot + 1 : dot);
    }
    return s.empty() ? std::optional{out} : std::nullopt;
}

BotPatterns BotPatterns::parse(std::istream& in) {
    BotPatterns p;
    for_config_lines(in, [&](int n, std::string_view line) {
        if (line.starts_with("re:")) {
            const auto expr = trim(line.substr(3));
            if (expr.empty()) config_error("bot patterns", n, "empty regex");
            try {
                p.regexes_.emplace_back(std::string(expr), std::regex::ECMAScript | std::regex::icase);
            } catch (const std::regex_error& e) {
                config_error("bot patterns", n, e.what());
            }
        } else {
            p.substrings_.push_back(lower(line));
        }
    });
    return p;
}

BotPatterns BotPatterns::load(const std::filesystem::path& path) {
    auto in = open_config(path);
    return parse(in);
}

bool BotPatterns::matches(std::string_view user_agent) const {
    if (empty()) return false;
    const auto ua = lower(user_agent);
    for (const auto& s : substrings_)
        if (ua.find(s) != std::string::npos) return true;
    for (const auto& r : regexes_)
        if (std::regex_search(ua, r)) return true;
    return false;
}

PartnerSet PartnerSet::parse(std::istream& in) {
    PartnerSet p;
    for_config_lines(in, [&](int n, std::string_view line) {
        if (line.starts_with("id:")) {
            const auto id = trim(line.substr(3));
            if (id.empty()) config_error("partners", n, "empty id");
            p.ids_.emplace(id);
        } else if (auto block = parse_cidr(line)) {
            p.blocks_.push_back(*block);
        } else {
            config_error("partners", n, "not an IPv4 address or CIDR block: " + std::string(line));
        }
    });
    return p;
}

PartnerSet PartnerSet::load(const std::filesystem::path& path) {
    auto in = open_config(path);
    return parse(in);
}

bool PartnerSet::contains(std::string_view ip) const {
    if (ids_.contains(ip)) return true;
    const auto addr = parse_ipv4(ip);
    if (!addr) return false;
    for (const auto& [base, len] : blocks_) {
        const std::uint32_t mask = len == 0 ? 0 : ~std::uint32_t{0} << (32 - len);
        if ((*addr & mask) == base) return true;
    }
    return false;
}

GeoTable GeoTable::parse(std::istream& in) {
    GeoTable t;
    bool first = true;
    for_config_lines(in, [&](int n, std::string_view line) {
        const bool header = first && line.starts_with("prefix");
        first = false;
        if (header) return;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
            config_error("geo table", n, "expected prefix,city,country");
        const auto block = parse_cidr(trim(line.substr(0, c1)));
        if (!block) config_error("geo table", n, "bad prefix");
        GeoRecord rec{std::string(trim(line.substr(c1 + 1, c2 - c1 - 1))), std::string(trim(line.substr(c2 + 1)))};
        if (rec.city.empty() || rec.country.empty()) config_error("geo table", n, "empty city or country");
        auto& slot = t.by_length_[static_cast<std::size_t>(block->second)];
        if (!slot.emplace(block->first, std::move(rec)).second) config_error("geo table", n, "duplicate prefix");
    });
    return t;
}

GeoTable GeoTable::load(const std::filesystem::path& path) {
    auto in = open_config(path);
    return parse(in);
}

const GeoRecord& GeoTable::lookup(std::string_view ip) const {
    const auto addr = parse_ipv4(ip);
    if (!addr) return unknown_geo;
    for (int len = 32; len >= 0; --len) {
        const auto& slot = by_length_[static_cast<std::size_t>(len)];
        if (slot.empty()) continue;
        const std::uint32_t mask = len == 0 ? 0 : ~std::uint32_t{0} << (32 - len);
        if (auto it = slot.find(*addr & mask); it != slot.end()) return it->second;
    }
    return unknown_geo;
}

std::size_t GeoTable::size() const noexcept {
    std::size_t n = 0;
    for (const auto& m : by_length_) n += m.size();
    return n;
}

bool is_static_path(std::string_view path) {
    if (path.starts_with("/static/") || path.starts_with("/assets/") || path == "/favicon.ico") return true;
    const auto slash = path.rfind('/');
    const auto name = path.substr(slash == std::string_view::npos ? 0 : slash + 1);
    const auto dot = name.rfind('.');
    if (dot == std::string_view::npos) return false;
    static constexpr std::array<std::string_view, 13> exts{".js",  ".css", ".png", ".jpg",  ".jpeg", ".gif", ".svg",
                                                           ".ico", ".woff", ".woff2", ".ttf", ".map",  ".html"};
    const auto ext = lower(name.substr(dot));
    return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

Removal Filters::verdict(const AccessLogEntry& e) const {
    if (bots.matches(e.user_agent)) return Removal::bot;
    if (partners.contains(e.ip)) return Removal::partner;
    if (is_static_path(e.path())) return Removal::static_content;
    return Removal::kept;
}

}  // namespace role::analytics
