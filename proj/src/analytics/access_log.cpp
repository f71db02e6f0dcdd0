#include "role/analytics/access_log.hpp"

#include <array>
#include <charconv>
#include <cctype>
#include <cstdio>

namespace role::analytics {

namespace {

constexpr std::array<std::string_view, 12> months{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

template <typename T>
bool to_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

// "10/Oct/2000:13:55:36 -0700"
std::optional<Timestamp> parse_clf_time(std::string_view s) {
    if (s.size() != 26 || s[2] != '/' || s[6] != '/' || s[11] != ':' || s[14] != ':' || s[17] != ':' ||
        s[20] != ' ')
        return std::nullopt;
    int day = 0, year = 0, hh = 0, mm = 0, ss = 0, off = 0;
    if (!to_number(s.substr(0, 2), day) || !to_number(s.substr(7, 4), year) || !to_number(s.substr(12, 2), hh) ||
        !to_number(s.substr(15, 2), mm) || !to_number(s.substr(18, 2), ss) || !to_number(s.substr(22, 4), off))
        return std::nullopt;
    unsigned month = 0;
    for (unsigned i = 0; i < months.size(); ++i)
        if (months[i] == s.substr(3, 3)) month = i + 1;
    if (month == 0 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    const char sign = s[21];
    if (sign != '+' && sign != '-') return std::nullopt;
    const int offset_min = (off / 100) * 60 + off % 100;
    std::int64_t secs = days_from_civil(year, month, static_cast<unsigned>(day)) * 86400 + hh * 3600 + mm * 60 + ss;
    secs -= (sign == '-' ? -offset_min : offset_min) * 60;
    return secs * 1000;
}

// Next double-quoted field starting at pos; handles \" escapes.
std::optional<std::string> quoted(std::string_view line, std::size_t& pos) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size() || line[pos] != '"') return std::nullopt;
    std::string out;
    for (++pos; pos < line.size(); ++pos) {
        if (line[pos] == '\\' && pos + 1 < line.size()) {
            out += line[++pos];
        } else if (line[pos] == '"') {
            ++pos;
            return out;
        } else {
            out += line[pos];
        }
    }
    return std::nullopt;
}

std::string_view token(std::string_view line, std::size_t& pos) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const auto start = pos;
    while (pos < line.size() && line[pos] != ' ') ++pos;
    return line.substr(start, pos - start);
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string_view AccessLogEntry::path() const {
    std::string_view t = target;
    return t.substr(0, t.find('?'));
}

std::optional<std::string> AccessLogEntry::query_param(std::string_view key) const {
    const auto q = target.find('?');
    if (q == std::string::npos) return std::nullopt;
    std::string_view rest = std::string_view(target).substr(q + 1);
    while (!rest.empty()) {
        const auto amp = rest.find('&');
        const auto pair = rest.substr(0, amp);
        const auto eq = pair.find('=');
        if (pair.substr(0, eq) == key) return url_decode(eq == std::string_view::npos ? "" : pair.substr(eq + 1));
        if (amp == std::string_view::npos) break;
        rest.remove_prefix(amp + 1);
    }
    return std::nullopt;
}

std::string url_decode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            unsigned v = 0;
            std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
            out += static_cast<char>(v);
            i += 2;
            continue;
        }
        out += s[i] == '+' ? ' ' : s[i];
    }
    return out;
}

std::optional<AccessLogEntry> parse_clf_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
    AccessLogEntry e;
    std::size_t pos = 0;
    e.ip = std::string(token(line, pos));
    token(line, pos);  // identd
    token(line, pos);  // user
    if (e.ip.empty()) return std::nullopt;
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size() || line[pos] != '[') return std::nullopt;
    const auto close = line.find(']', pos);
    if (close == std::string_view::npos) return std::nullopt;
    auto ts = parse_clf_time(line.substr(pos + 1, close - pos - 1));
    if (!ts) return std::nullopt;
    e.ts = *ts;
    pos = close + 1;

    auto request = quoted(line, pos);
    if (!request) return std::nullopt;
    const auto sp1 = request->find(' ');
    if (sp1 == std::string::npos) return std::nullopt;
    const auto sp2 = request->find(' ', sp1 + 1);
    e.method = request->substr(0, sp1);
    e.target = request->substr(sp1 + 1, sp2 == std::string::npos ? std::string::npos : sp2 - sp1 - 1);
    if (e.method.empty() || e.target.empty()) return std::nullopt;

    if (!to_number(token(line, pos), e.status) || e.status < 100 || e.status > 599) return std::nullopt;
    const auto bytes = token(line, pos);
    if (bytes != "-" && !to_number(bytes, e.bytes)) return std::nullopt;

    if (auto referer = quoted(line, pos)) {
        if (auto ua = quoted(line, pos)) e.user_agent = std::move(*ua);
    }
    return e;
}

std::string format_clf_line(const AccessLogEntry& e) {
    std::int64_t secs = e.ts / 1000;
    if (e.ts % 1000 < 0) --secs;
    const auto day = secs / 86400 - (secs % 86400 < 0 ? 1 : 0);
    const auto rem = secs - day * 86400;
    const auto date = day_string(day);  // YYYY-MM-DD
    const int month = std::stoi(date.substr(5, 2));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s/%s/%s:%02lld:%02lld:%02lld +0000", date.substr(8, 2).c_str(),
                  std::string(months[static_cast<std::size_t>(month - 1)]).c_str(), date.substr(0, 4).c_str(),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem % 3600 / 60),
                  static_cast<long long>(rem % 60));
    return e.ip + " - - [" + buf + "] \"" + escape(e.method) + " " + escape(e.target) + " HTTP/1.1\" " +
           std::to_string(e.status) + " " + std::to_string(e.bytes) + " \"-\" \"" + escape(e.user_agent) + "\"";
}

AccessLogEntry event_to_entry(const ActivityEvent& ev) {
    AccessLogEntry e;
    e.ip = ev.actor;
    e.ts = ev.ts;
    e.status = 200;
    e.user_agent = "role-event-log";
    const std::string space = ev.space.value_or("");
    const std::string widget = ev.details.is_object() ? ev.details.value("widget_id", std::string{}) : std::string{};
    const std::string widget_q = widget.empty() ? "" : "?widget=" + widget;
    switch (ev.verb) {
        case Verb::space_create:
            e.method = "POST";
            e.target = "/api/spaces?name=" + space;
            break;
        case Verb::space_load:
            e.method = "GET";
            e.target = "/api/spaces/" + space;
            break;
        case Verb::space_join:
            e.method = "POST";
            e.target = "/api/spaces/" + space + "/members";
            break;
        case Verb::space_leave:
            e.method = "DELETE";
            e.target = "/api/spaces/" + space + "/members";
            break;
        case Verb::widget_add:
            e.method = "POST";
            e.target = "/api/spaces/" + space + "/widgets" + widget_q;
            break;
        case Verb::widget_remove:
            e.method = "DELETE";
            e.target = "/api/spaces/" + space + "/widgets/" + ev.object_id + widget_q;
            break;
        case Verb::widget_load:
            e.method = "GET";
            e.target = "/api/spaces/" + space + "/widgets/" + ev.object_id + widget_q;
            break;
        default:
            e.method = "POST";
            e.target = "/api/events/" + std::string(to_string(ev.verb));
            break;
    }
    return e;
}

LogInput read_log_lines(std::istream& in) {
    LogInput input;
    bool detected = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!detected) {
            input.format = line[line.find_first_not_of(" \t")] == '{' ? LogFormat::event_lines : LogFormat::combined;
            detected = true;
        }
        input.lines.push_back(std::move(line));
    }
    return input;
}

}  // namespace role::analytics
