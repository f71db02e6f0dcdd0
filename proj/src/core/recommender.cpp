#include "role/recommender.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>

#include "role/error.hpp"

namespace role {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::set<std::string> goal_strategies(const LearnerRecord* learner) {
    std::set<std::string> out;
    if (!learner) return out;
    for (const auto& [key, c] : learner->goals)
        if (key.kind == CompetenceKind::srl) out.insert(key.first);
    return out;
}

}  // namespace

std::string_view to_string(RecommendationKind k) {
    switch (k) {
        case RecommendationKind::widget: return "widget";
        case RecommendationKind::activity: return "activity";
        case RecommendationKind::content: return "content";
    }
    return "?";
}

nlohmann::ordered_json to_json(const Recommendation& r) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(r.kind);
    j["item_id"] = r.item_id;
    j["score"] = r.score;
    j["add_count"] = r.add_count;
    j["reasons"] = r.reasons;
    return j;
}

bool ranks_before(const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.add_count != b.add_count) return a.add_count > b.add_count;
    return a.item_id < b.item_id;
}

std::vector<Recommendation> recommend_widgets(const Catalog& catalog, std::string_view entity,
                                              const LearnerRecord* learner) {
    const auto candidates = catalog.widgets_for(entity);
    const auto goals = goal_strategies(learner);

    std::map<std::string, std::set<std::string>> techniques_of_goal;
    for (const auto& s : goals)
        if (catalog.find_strategy(s))
            for (const auto& t : catalog.techniques_for(s)) techniques_of_goal[s].insert(t.id);

    std::vector<Recommendation> out;
    out.reserve(candidates.size());
    for (const auto& w : candidates) {
        Recommendation r;
        r.kind = RecommendationKind::widget;
        r.item_id = w.id;
        r.add_count = w.add_count;
        r.reasons.push_back("supports " + std::string(entity));
        int bonus = 0;
        for (const auto& [strategy, techs] : techniques_of_goal) {
            const bool hit = std::any_of(w.techniques.begin(), w.techniques.end(),
                                         [&](const std::string& t) { return techs.count(t) != 0; });
            if (hit) {
                ++bonus;
                r.reasons.push_back("goal strategy " + strategy);
            }
        }
        r.score = 1 + bonus;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

WidgetInstance accept_widget_recommendation(SpaceService& spaces, EventLog& log, std::string_view space,
                                            const Recommendation& rec, const std::string& actor,
                                            std::string_view activity, const Clock& clock) {
    if (rec.kind != RecommendationKind::widget)
        throw Error(ErrorCode::validation_error, "only widget recommendations can be added to a space");
    if (!spaces.is_member(space, actor)) {
        if (!spaces.exists(space)) throw Error(ErrorCode::unknown_space, "unknown space '" + std::string(space) + "'");
        throw Error(ErrorCode::not_a_member, actor + " is not a member of '" + std::string(space) + "'");
    }
    ActivityEvent e;
    e.ts = clock();
    e.actor = actor;
    e.verb = Verb::recommendation_accepted;
    e.object_type = "widget";
    e.object_id = rec.item_id;
    e.space = std::string(space);
    e.details = {{"score", rec.score}};
    // ts is raised by the log if the space already has later events
    log.append(std::move(e));
    return spaces.add_widget(space, activity, rec.item_id, actor);
}

// --- activity scheduler ----------------------------------------------------

nlohmann::ordered_json to_json(const SchedulerState& s) {
    nlohmann::ordered_json j;
    j["learner"] = s.learner;
    j["counts"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.counts) j["counts"][k] = v;
    j["cooldowns"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.cooldowns) j["cooldowns"][k] = v;
    j["window"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.window) j["window"][k] = v;
    j["cursor"] = to_string(s.cursor);
    j["pending"] = s.pending ? nlohmann::ordered_json(*s.pending) : nlohmann::ordered_json(nullptr);
    j["drilled"] = s.drilled;
    return j;
}

SchedulerState scheduler_state_from_json(const nlohmann::json& j) {
    SchedulerState s;
    s.learner = j.value("learner", std::string{});
    if (auto it = j.find("counts"); it != j.end())
        for (const auto& [k, v] : it->items()) s.counts[k] = v.get<std::uint64_t>();
    if (auto it = j.find("cooldowns"); it != j.end())
        for (const auto& [k, v] : it->items()) s.cooldowns[k] = v.get<int>();
    if (auto it = j.find("window"); it != j.end())
        for (const auto& [k, v] : it->items()) s.window[k] = v.get<std::uint64_t>();
    s.cursor = parse_phase(j.value("cursor", std::string("plan"))).value_or(Phase::plan);
    if (auto it = j.find("pending"); it != j.end() && it->is_string()) s.pending = it->get<std::string>();
    if (auto it = j.find("drilled"); it != j.end()) s.drilled = it->get<std::vector<std::string>>();
    return s;
}

ActivityStep next_activity(const Catalog& catalog, SchedulerState state) {
    const auto& strategies = catalog.strategies();
    if (strategies.empty()) throw Error(ErrorCode::unknown_strategy, "catalog has no strategies");

    auto count = [&](const std::string& id) {
        auto it = state.counts.find(id);
        return it == state.counts.end() ? std::uint64_t{0} : it->second;
    };
    auto blocked = [&](const std::string& id) {
        auto it = state.cooldowns.find(id);
        return it != state.cooldowns.end() && it->second > 0;
    };

    // a strategy already accepted twice in this window waits for the next one
    auto capped = [&](const std::string& id) {
        auto it = state.window.find(id);
        return it != state.window.end() && it->second >= 2;
    };
    auto open = [&](const Strategy& s) { return !blocked(s.id) && !capped(s.id); };
    auto free = [&](const Strategy& s) { return !blocked(s.id); };
    const bool any_open = std::any_of(strategies.begin(), strategies.end(), open);
    const bool any_free = std::any_of(strategies.begin(), strategies.end(), free);
    auto eligible = [&](const Strategy& s) { return any_open ? open(s) : !any_free || free(s); };

    std::uint64_t lowest = std::numeric_limits<std::uint64_t>::max();
    for (const auto& s : strategies)
        if (eligible(s)) lowest = std::min(lowest, count(s.id));

    const Strategy* pick = nullptr;
    Phase p = state.cursor;
    for (int step = 0; step < 4 && !pick; ++step, p = next_phase(p))
        for (const auto& s : strategies)
            if (s.phase == p && eligible(s) && count(s.id) == lowest) {
                pick = &s;
                break;
            }

    for (auto it = state.cooldowns.begin(); it != state.cooldowns.end();) {
        if (--it->second <= 0)
            it = state.cooldowns.erase(it);
        else
            ++it;
    }

    Recommendation rec;
    rec.kind = RecommendationKind::activity;
    rec.item_id = pick->id;
    rec.score = 1;
    rec.reasons = {"phase " + std::string(to_string(pick->phase)),
                   "applied " + std::to_string(count(pick->id)) + " times"};
    state.pending = pick->id;
    state.drilled.clear();
    return {std::move(rec), std::move(state)};
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::accepted: return "accepted";
        case Outcome::skipped: return "skipped";
        case Outcome::drill_down: return "drill_down";
    }
    return "?";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
    if (s == "accepted") return Outcome::accepted;
    if (s == "skipped") return Outcome::skipped;
    if (s == "drill_down") return Outcome::drill_down;
    return std::nullopt;
}

OutcomeResult record_outcome(const Catalog& catalog, SchedulerState state, const Recommendation& rec,
                             Outcome outcome, const LearnerRecord* learner, const SchedulerConfig& config) {
    const bool is_pending = state.pending && rec.item_id == *state.pending;
    const bool is_drilled = std::find(state.drilled.begin(), state.drilled.end(), rec.item_id) != state.drilled.end();
    if (rec.kind != RecommendationKind::activity || (!is_pending && !is_drilled))
        throw Error(ErrorCode::stale_recommendation, "'" + rec.item_id + "' is not the current recommendation");

    OutcomeResult result;
    switch (outcome) {
        case Outcome::accepted: {
            std::string strategy = rec.item_id;
            if (is_drilled) {
                const auto* t = catalog.find_technique(rec.item_id);
                if (!t) throw Error(ErrorCode::unknown_technique, "unknown technique '" + rec.item_id + "'");
                strategy = t->strategy;
                result.applied = t->id;
            }
            const auto* s = catalog.find_strategy(strategy);
            if (!s) throw Error(ErrorCode::unknown_strategy, "unknown strategy '" + strategy + "'");
            ++state.counts[strategy];
            ++state.window[strategy];
            std::uint64_t in_window = 0;
            for (const auto& [id, n] : state.window) in_window += n;
            if (in_window >= catalog.strategies().size()) state.window.clear();
            state.cursor = next_phase(s->phase);
            state.pending.reset();
            state.drilled.clear();
            break;
        }
        case Outcome::skipped:
            state.cooldowns[rec.item_id] = config.skip_cooldown;
            state.pending.reset();
            state.drilled.clear();
            break;
        case Outcome::drill_down: {
            if (!is_pending) throw Error(ErrorCode::stale_recommendation, "drill-down needs a strategy recommendation");
            auto techniques = catalog.techniques_for(rec.item_id);
            std::set<std::string> familiar;
            if (learner)
                for (const auto& [key, c] : learner->acquired)
                    if (key.kind == CompetenceKind::tool) familiar.insert(key.second);
            std::stable_partition(techniques.begin(), techniques.end(),
                                  [&](const Technique& t) { return familiar.count(t.id) != 0; });
            state.drilled.clear();
            for (const auto& t : techniques) state.drilled.push_back(t.id);
            result.techniques = std::move(techniques);
            break;
        }
    }
    result.state = std::move(state);
    return result;
}

// --- content ---------------------------------------------------------------

Corpus corpus_from_json(const nlohmann::json& doc) {
    Corpus corpus;
    try {
        for (const auto& o : doc.at("objects")) {
            LearningObject lo;
            lo.id = o.at("id").get<std::string>();
            lo.title = o.value("title", std::string{});
            lo.text = o.value("text", std::string{});
            lo.concepts = o.value("concepts", std::vector<std::string>{});
            corpus.objects.push_back(std::move(lo));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corpus_unavailable, std::string("corpus: ") + e.what());
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::corpus_unavailable, "cannot open corpus " + path.string());
    try {
        return corpus_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corpus_unavailable, path.string() + ": " + e.what());
    }
}

std::vector<Recommendation> recommend_content(const LearnerRecord& learner, const Corpus* corpus) {
    if (!corpus) throw Error(ErrorCode::corpus_unavailable, "no content corpus loaded");

    std::set<std::string> query;
    for (const auto& [key, c] : learner.goals)
        if (key.kind == CompetenceKind::domain) query.insert(key.first);
    for (const auto& g : competence_gap(learner))
        if (g.key.kind == CompetenceKind::domain) query.insert(g.key.first);
    if (query.empty()) return {};

    std::vector<Recommendation> out;
    for (const auto& lo : corpus->objects) {
        Recommendation r;
        r.kind = RecommendationKind::content;
        r.item_id = lo.id;
        int score = 0;
        for (const auto& c : lo.concepts)
            if (query.count(c)) {
                ++score;
                r.reasons.push_back("concept " + c);
            }
        if (score == 0) {
            const auto title = lower(lo.title);
            for (const auto& q : query) {
                std::string term = lower(q);
                std::replace(term.begin(), term.end(), '_', ' ');
                if (title.find(term) != std::string::npos) {
                    ++score;
                    r.reasons.push_back("title mentions " + term);
                }
            }
        }
        if (score == 0) continue;
        r.score = score;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

// --- lint ------------------------------------------------------------------

std::string_view to_string(FindingKind k) {
    switch (k) {
        case FindingKind::missing_phase_coverage: return "MissingPhaseCoverage";
        case FindingKind::too_many_widgets: return "TooManyWidgets";
        case FindingKind::unfamiliar_tool: return "UnfamiliarTool";
    }
    return "?";
}

nlohmann::ordered_json to_json(const Finding& f) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(f.kind);
    j["subject"] = f.subject;
    return j;
}

std::vector<Finding> lint_space(const Catalog& catalog, const Space& space, const LearnerRecord* learner,
                                const LintConfig& config) {
    std::vector<Finding> findings;

    std::set<Phase> covered;
    std::set<std::string> widget_ids;
    for (const auto& a : space.activities)
        for (const auto& w : a.widgets) {
            widget_ids.insert(w.widget_id);
            if (catalog.has_widget(w.widget_id))
                for (auto p : catalog.phases_of_widget(w.widget_id)) covered.insert(p);
        }
    for (auto p : all_phases)
        if (!covered.count(p)) findings.push_back({FindingKind::missing_phase_coverage, std::string(to_string(p))});

    const auto count = space.widget_count();
    if (count > config.max_widgets) findings.push_back({FindingKind::too_many_widgets, std::to_string(count)});

    std::set<std::string> tools;
    std::set<std::string> tool_techniques;
    if (learner)
        for (const auto& [key, c] : learner->acquired)
            if (key.kind == CompetenceKind::tool) {
                tools.insert(key.first);
                tool_techniques.insert(key.second);
            }
    for (const auto& id : widget_ids) {
        if (tools.count(id)) continue;
        const auto w = catalog.find_widget(id);
        const bool overlap = w && std::any_of(w->techniques.begin(), w->techniques.end(),
                                              [&](const std::string& t) { return tool_techniques.count(t) != 0; });
        if (!overlap) findings.push_back({FindingKind::unfamiliar_tool, id});
    }
    return findings;
}

}  // namespace role
