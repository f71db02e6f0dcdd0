#pragma once

// Independent reference computations for the tests. Everything here works
// from raw catalog documents or plain containers and never calls the code
// under test for the quantity being checked.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace role::testing {

inline const std::vector<std::string> phase_names{"plan", "prepare", "learn", "reflect"};
inline const std::vector<std::string> group_names{"cognitive", "meta_cognitive", "resource_management"};
inline const std::vector<std::string> store_categories{
    "Search & Get Recommendation", "Plan & Organize",        "Communicate & Collaborate", "Create & Modify",
    "Train & Test",                "Explore & View Content", "Reflect & Evaluate"};

inline std::size_t below(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// Valid catalog document with random strategies, techniques and widgets.
// Some strategies get no techniques and some techniques no widgets.
inline nlohmann::json random_catalog(std::mt19937_64& rng, std::size_t max_widgets = 20) {
    nlohmann::json doc;
    doc["catalog_version"] = 1;
    doc["phases"] = phase_names;

    const std::size_t n_strategies = 1 + below(rng, 9);
    for (std::size_t i = 0; i < n_strategies; ++i)
        doc["strategies"].push_back({{"id", "s" + std::to_string(i)},
                                     {"name", "Strategy " + std::to_string(i)},
                                     {"group", group_names[below(rng, 3)]},
                                     {"phase", phase_names[below(rng, 4)]}});

    const std::size_t n_techniques = below(rng, 16);
    doc["techniques"] = nlohmann::json::array();
    for (std::size_t i = 0; i < n_techniques; ++i)
        doc["techniques"].push_back({{"id", "t" + std::to_string(i)},
                                     {"name", "Technique " + std::to_string(i)},
                                     {"strategy", "s" + std::to_string(below(rng, n_strategies))}});

    for (const auto& c : store_categories) {
        nlohmann::json phases = nlohmann::json::array();
        for (const auto& p : phase_names)
            if (coin(rng, 0.4)) phases.push_back(p);
        if (phases.empty()) phases.push_back(phase_names[below(rng, 4)]);
        doc["categories"].push_back({{"id", c}, {"phases", phases}});
    }
    doc["vocabularies"] = nlohmann::json::array({{{"id", "v"}, {"concepts", {"c0", "c1", "c2"}}}});

    const std::size_t n_widgets = below(rng, max_widgets + 1);
    doc["widgets"] = nlohmann::json::array();
    for (std::size_t i = 0; i < n_widgets; ++i) {
        nlohmann::json techniques = nlohmann::json::array();
        for (std::size_t t = 0; t < n_techniques; ++t)
            if (coin(rng, 0.2)) techniques.push_back("t" + std::to_string(t));
        nlohmann::json categories = nlohmann::json::array();
        for (const auto& c : store_categories)
            if (coin(rng, 0.1)) categories.push_back(c);
        doc["widgets"].push_back({{"id", "w" + std::to_string(i)},
                                  {"title", "Widget " + std::to_string(i)},
                                  {"description", ""},
                                  {"launch_url", "/w/" + std::to_string(i)},
                                  {"techniques", techniques},
                                  {"categories", categories},
                                  {"srl", coin(rng, 0.3)},
                                  {"add_count", below(rng, 3)}});
    }
    doc["bundles"] = nlohmann::json::array();
    doc["templates"] = nlohmann::json::array();
    return doc;
}

inline std::map<std::string, std::string> technique_strategy(const nlohmann::json& doc) {
    std::map<std::string, std::string> out;
    for (const auto& t : doc["techniques"]) out[t["id"].get<std::string>()] = t["strategy"].get<std::string>();
    return out;
}

// Technique ids reachable from a phase, strategy or technique id.
inline std::set<std::string> reachable_techniques(const nlohmann::json& doc, const std::string& entity) {
    std::set<std::string> strategies;
    for (const auto& s : doc["strategies"])
        if (s["phase"] == entity || s["id"] == entity) strategies.insert(s["id"].get<std::string>());
    std::set<std::string> out;
    for (const auto& [t, s] : technique_strategy(doc))
        if (t == entity || strategies.count(s)) out.insert(t);
    return out;
}

inline std::vector<std::string> widgets_reachable(const nlohmann::json& doc, const std::string& entity) {
    const auto techniques = reachable_techniques(doc, entity);
    std::set<std::string> out;
    for (const auto& w : doc["widgets"])
        for (const auto& t : w["techniques"])
            if (techniques.count(t.get<std::string>())) out.insert(w["id"].get<std::string>());
    return {out.begin(), out.end()};
}

struct ScoredWidget {
    std::string id;
    int score = 0;
    std::uint64_t add_count = 0;
    bool operator==(const ScoredWidget&) const = default;
};

// Brute-force widget ranking: score 1 + number of goal strategies owning one
// of the widget's techniques; position = number of candidates that beat it.
inline std::vector<ScoredWidget> brute_force_ranking(const nlohmann::json& doc, const std::string& entity,
                                                     const std::set<std::string>& goal_strategies) {
    const auto owner = technique_strategy(doc);
    std::vector<ScoredWidget> scored;
    for (const auto& id : widgets_reachable(doc, entity)) {
        for (const auto& w : doc["widgets"]) {
            if (w["id"] != id) continue;
            std::set<std::string> hit;
            for (const auto& t : w["techniques"]) {
                auto it = owner.find(t.get<std::string>());
                if (it != owner.end() && goal_strategies.count(it->second)) hit.insert(it->second);
            }
            scored.push_back({id, 1 + static_cast<int>(hit.size()), w["add_count"].get<std::uint64_t>()});
        }
    }
    auto beats = [](const ScoredWidget& a, const ScoredWidget& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.add_count != b.add_count) return a.add_count > b.add_count;
        return a.id < b.id;
    };
    std::vector<ScoredWidget> out(scored.size());
    for (const auto& a : scored) {
        std::size_t pos = 0;
        for (const auto& b : scored)
            if (beats(b, a)) ++pos;
        out[pos] = a;
    }
    return out;
}

// Goals and acquired competences as key -> level.
using LevelMap = std::map<std::string, int>;

struct GapRow {
    std::string key;
    int have = 0;
    int want = 0;
    bool operator==(const GapRow&) const = default;
};

inline std::vector<GapRow> brute_force_gap(const LevelMap& goals, const LevelMap& acquired) {
    std::vector<GapRow> out;
    for (const auto& [key, want] : goals) {
        int have = 0;
        for (const auto& [k, level] : acquired)
            if (k == key) have = level;
        if (have < want) out.push_back({key, have, want});
    }
    return out;
}

struct Vote {
    std::string learner;
    std::string signature;
    std::string technique;
    std::int64_t ts = 0;
};

// Majority vote; among tied techniques the one assigned most recently (by ts,
// later insertion on equal ts) wins. Own votes first, then everyone's.
inline std::optional<std::string> vote_oracle(const std::vector<Vote>& votes, const std::string& learner,
                                              const std::string& signature) {
    auto decide = [&](bool own_only) -> std::optional<std::string> {
        std::map<std::string, int> counts;
        std::vector<std::size_t> relevant;
        for (std::size_t i = 0; i < votes.size(); ++i) {
            const auto& v = votes[i];
            if (v.signature != signature || (own_only && v.learner != learner)) continue;
            ++counts[v.technique];
            relevant.push_back(i);
        }
        if (counts.empty()) return std::nullopt;
        int best = 0;
        for (const auto& [t, n] : counts) best = std::max(best, n);
        std::stable_sort(relevant.begin(), relevant.end(),
                         [&](std::size_t a, std::size_t b) { return votes[a].ts < votes[b].ts; });
        for (auto it = relevant.rbegin(); it != relevant.rend(); ++it)
            if (counts[votes[*it].technique] == best) return votes[*it].technique;
        return std::nullopt;
    };
    if (auto own = decide(true)) return own;
    return decide(false);
}

}  // namespace role::testing
