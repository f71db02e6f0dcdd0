#include "role/analytics/synthetic.hpp"

#include <array>
#include <random>

#include "role/analytics/access_log.hpp"

namespace role::analytics {

namespace {

constexpr std::array<const char*, 12> user_blocks{"134.130", "134.130", "141.20",  "128.130", "129.67",  "130.37",
                                                  "131.111", "143.129", "147.32",  "158.109", "161.116", "203.0"};
constexpr std::array<const char*, 4> human_agents{
    "Mozilla/5.0 (X11; Linux x86_64; rv:15.0) Gecko/20100101 Firefox/15.0",
    "Mozilla/5.0 (Windows NT 6.1) AppleWebKit/536.11 (KHTML, like Gecko) Chrome/20.0.1132.57 Safari/536.11",
    "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_7_4) AppleWebKit/534.57.2 Safari/534.57.2",
    "Opera/9.80 (Windows NT 6.1; U; \"de\") Presto/2.10.229 Version/12.00"};
constexpr std::array<const char*, 5> bot_agents{"Googlebot/2.1 (+http://www.google.com/bot.html)",
                                                "Mozilla/5.0 (compatible; bingbot/2.0)", "curl/7.22.0",
                                                "Yahoo! Slurp", "SomeCrawler/1.0"};
constexpr std::array<const char*, 5> static_paths{"/static/js/app.js", "/static/css/role.css", "/favicon.ico",
                                                  "/assets/logo.png", "/widgets/text_reader/index.html"};
constexpr std::array<const char*, 5> other_api{"/api/catalog/widgets", "/api/spaces/space-1/chat",
                                               "/api/learners/u1/feed", "/api/recommend/widgets?entity=plan",
                                               "/api/monitor/u1/profile"};

class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}
    std::uint64_t below(std::uint64_t n) { return rng_() % n; }

private:
    std::mt19937_64 rng_;
};

std::string user_ip(int user) {
    const auto block = user_blocks[static_cast<std::size_t>(user) % user_blocks.size()];
    const int x = (user * 7919) % 65536;
    return std::string(block) + "." + std::to_string(x / 256) + "." + std::to_string(x % 256);
}

}  // namespace

std::vector<std::string> generate_log(const SyntheticConfig& c) {
    Source rng(c.seed);
    std::vector<std::string> widgets = c.widgets;
    if (widgets.empty()) widgets = {"text_reader", "wiki", "mind_map"};
    const Timestamp span = static_cast<Timestamp>(c.days) * 86400000;
    const auto users = static_cast<std::uint64_t>(std::max(c.users, 1));
    const auto spaces = static_cast<std::uint64_t>(std::max(c.spaces, 1));

    std::vector<std::string> out;
    out.reserve(c.entries);
    for (std::size_t i = 0; i < c.entries; ++i) {
        AccessLogEntry e;
        const auto user = static_cast<int>(rng.below(users));
        e.ip = user_ip(user);
        e.ts = c.start + static_cast<Timestamp>(static_cast<__int128>(span) * static_cast<__int128>(i) /
                                                static_cast<__int128>(std::max<std::size_t>(c.entries, 1))) +
               static_cast<Timestamp>(rng.below(1000));
        e.method = "GET";
        e.status = 200;
        e.bytes = 200 + rng.below(20000);
        e.user_agent = human_agents[rng.below(human_agents.size())];
        // skewed towards low indices so a long tail of spaces is rarely touched
        const std::string space = "space-" + std::to_string(rng.below(rng.below(spaces) + 1));
        const std::string widget = widgets[rng.below(rng.below(widgets.size()) + 1)];
        const std::string instance = "i" + std::to_string(1 + rng.below(8));

        const auto roll = rng.below(100);
        if (roll < 2) {
            out.push_back(roll == 0 ? "garbage line without structure" : e.ip + " - - [32/Foo/2012:99:00:00 +0000] \"GET /\" 200 1");
            continue;
        } else if (roll < 7) {
            e.user_agent = bot_agents[rng.below(bot_agents.size())];
            e.target = "/api/spaces/" + space;
        } else if (roll < 10) {
            e.ip = rng.below(4) == 0 ? "193.174.1.1" : "130.149." + std::to_string(rng.below(256)) + "." + std::to_string(rng.below(256));
            e.target = "/api/spaces/" + space;
        } else if (roll < 20) {
            e.target = static_paths[rng.below(static_paths.size())];
        } else if (roll < 25) {
            e.target = rng.below(2) ? "/" : "/spaces/" + space;
        } else if (roll < 30) {
            const auto kind = rng.below(4);
            if (kind == 0) {
                e.target = "/api/spaces/" + space;
                e.status = 404;
            } else if (kind == 1) {
                e.method = "POST";
                e.target = "/api/spaces/" + space + "/widgets";  // no widget parameter
            } else if (kind == 2) {
                e.method = "POST";
                e.target = "/api/spaces?name=study%20group";
            } else {
                e.target = other_api[rng.below(other_api.size())];
            }
        } else {
            const auto kind = rng.below(100);
            if (kind < 40) {
                e.target = "/api/spaces/" + space;
            } else if (kind < 65) {
                e.target = "/api/spaces/" + space + "/widgets/" + instance + "?widget=" + widget;
            } else if (kind < 80) {
                e.method = "POST";
                e.target = "/api/spaces/" + space + "/widgets?widget=" + widget;
                e.status = 201;
            } else if (kind < 88) {
                e.method = "POST";
                e.target = "/api/spaces/" + space + "/members";
            } else if (kind < 93) {
                e.method = "POST";
                e.target = rng.below(5) == 0 ? "/api/spaces?name=" + space + "&x=1" : "/api/spaces?name=" + space;
                e.status = 201;
            } else if (kind < 97) {
                e.method = "DELETE";
                e.target = "/api/spaces/" + space + "/widgets/" + instance + "?widget=" + widget;
                e.status = 204;
            } else {
                e.method = "DELETE";
                e.target = "/api/spaces/" + space + "/members";
                e.status = 204;
            }
        }
        if (rng.below(50) == 0) e.bytes = 0;
        out.push_back(format_clf_line(e));
    }
    return out;
}

}  // namespace role::analytics
