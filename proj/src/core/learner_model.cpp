#include "role/learner_model.hpp"

#include <mutex>

#include "role/error.hpp"

namespace role {

std::string competence_id(const CompetenceKey& key) {
    std::string out(to_string(key.kind));
    out += ':';
    out += key.first;
    if (!key.second.empty()) {
        out += '@';
        out += key.second;
    }
    return out;
}

CompetenceGap competence_gap(const LearnerRecord& record) {
    CompetenceGap gap;
    for (const auto& [key, goal] : record.goals) {
        const int want = level_of(goal);
        auto it = record.acquired.find(key);
        const int have = it == record.acquired.end() ? 0 : level_of(it->second);
        if (have < want) gap.push_back({key, have, want});
    }
    return gap;
}

std::map<std::string, std::uint64_t> technique_counts(const LearnerRecord& record) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& a : record.applies) ++counts[a.technique];
    return counts;
}

std::map<std::string, std::uint64_t> strategy_histogram(const Catalog& catalog, const LearnerRecord& record) {
    std::map<std::string, std::uint64_t> hist;
    for (const auto& s : catalog.strategies()) hist[s.id] = 0;
    for (const auto& a : record.applies)
        if (const auto* t = catalog.find_technique(a.technique)) ++hist[t->strategy];
    return hist;
}

nlohmann::ordered_json to_json(const GapEntry& g) {
    nlohmann::ordered_json j;
    j["competence"] = competence_id(g.key);
    j["kind"] = to_string(g.key.kind);
    j["have"] = g.have;
    j["want"] = g.want;
    return j;
}

LearnerStore::LearnerStore(const Catalog& catalog, EventLog& log, Clock clock)
    : catalog_(catalog), log_(log), clock_(std::move(clock)) {}

LearnerRecord& LearnerStore::record_locked(const std::string& learner) {
    auto [it, inserted] = records_.try_emplace(learner);
    if (inserted) it->second.learner_id = learner;
    return it->second;
}

LearnerRecord LearnerStore::ensure(const std::string& learner) {
    std::unique_lock lock(mutex_);
    return record_locked(learner);
}

LearnerRecord LearnerStore::set_competence(const std::string& learner, const Competence& c, CompetenceSlot slot) {
    catalog_.check(c);
    LearnerRecord snapshot;
    const auto key = key_of(c);
    {
        std::unique_lock lock(mutex_);
        auto& rec = record_locked(learner);
        auto& target = slot == CompetenceSlot::acquired ? rec.acquired : rec.goals;
        target.insert_or_assign(key, c);
        snapshot = rec;
        ActivityEvent e;
        e.ts = clock_();
        e.actor = learner;
        e.verb = slot == CompetenceSlot::acquired ? Verb::competence_set : Verb::goal_set;
        e.object_type = "competence";
        e.object_id = competence_id(key);
        e.details = to_json(c);
        log_.append(std::move(e));
    }
    return snapshot;
}

void LearnerStore::record_application(const std::string& learner, std::string_view technique, Timestamp ts,
                                      nlohmann::json details) {
    if (!catalog_.find_technique(technique))
        throw Error(ErrorCode::unknown_technique, "unknown technique '" + std::string(technique) + "'");
    std::unique_lock lock(mutex_);
    auto& rec = record_locked(learner);
    if (!rec.applies.empty() && ts < rec.applies.back().ts)
        throw Error(ErrorCode::non_monotonic_timestamp,
                    "application at " + std::to_string(ts) + " precedes " + std::to_string(rec.applies.back().ts));
    rec.applies.push_back({ts, std::string(technique)});
    ActivityEvent e;
    e.ts = ts;
    e.actor = learner;
    e.verb = Verb::technique_apply;
    e.object_type = "technique";
    e.object_id = std::string(technique);
    e.details = std::move(details);
    log_.append(std::move(e));
}

void LearnerStore::set_parameter(const std::string& learner, const std::string& key, const std::string& value) {
    std::unique_lock lock(mutex_);
    record_locked(learner).parameters[key] = value;
    ActivityEvent e;
    e.ts = clock_();
    e.actor = learner;
    e.verb = Verb::learner_parameter;
    e.object_type = "parameter";
    e.object_id = key;
    e.details = {{"value", value}};
    log_.append(std::move(e));
}

LearnerRecord LearnerStore::get(std::string_view learner) const {
    auto rec = find(learner);
    if (!rec) throw Error(ErrorCode::unknown_learner, "unknown learner '" + std::string(learner) + "'");
    return *rec;
}

std::optional<LearnerRecord> LearnerStore::find(std::string_view learner) const {
    std::shared_lock lock(mutex_);
    auto it = records_.find(learner);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> LearnerStore::learner_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : records_) out.push_back(id);
    return out;
}

CompetenceGap LearnerStore::competence_gap(std::string_view learner) const {
    auto rec = find(learner);
    return rec ? role::competence_gap(*rec) : CompetenceGap{};
}

nlohmann::ordered_json LearnerStore::learner_feed(std::string_view learner, std::size_t last_n) const {
    const auto rec = get(learner);
    nlohmann::ordered_json feed;
    feed["learner"] = rec.learner_id;

    auto competences = [](const std::map<CompetenceKey, Competence>& m) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& [key, c] : m) {
            nlohmann::ordered_json j;
            j["competence"] = competence_id(key);
            j["kind"] = to_string(key.kind);
            j["level"] = level_of(c);
            arr.push_back(std::move(j));
        }
        return arr;
    };
    feed["acquired"] = competences(rec.acquired);
    feed["goals"] = competences(rec.goals);

    feed["gap"] = nlohmann::ordered_json::array();
    for (const auto& g : role::competence_gap(rec)) feed["gap"].push_back(to_json(g));

    // strategies in catalog (id) order, grouped fields kept flat for charting
    feed["strategy_histogram"] = nlohmann::ordered_json::object();
    for (const auto& [id, n] : strategy_histogram(catalog_, rec)) feed["strategy_histogram"][id] = n;
    feed["applications"] = rec.applies.size();

    feed["uses"] = nlohmann::ordered_json::object();
    std::uint64_t total_uses = 0;
    for (const auto& [w, n] : rec.uses) {
        feed["uses"][w] = n;
        total_uses += n;
    }
    feed["distinct_tools"] = rec.uses.size();
    feed["total_uses"] = total_uses;

    feed["parameters"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rec.parameters) feed["parameters"][k] = v;

    feed["recent_events"] = nlohmann::ordered_json::array();
    for (const auto& e : log_.by_actor(rec.learner_id, last_n)) feed["recent_events"].push_back(to_json(e));
    return feed;
}

void LearnerStore::observe(const ActivityEvent& e) {
    if (e.verb != Verb::widget_add && e.verb != Verb::widget_load) return;
    const auto widget = e.details.value("widget_id", std::string{});
    if (widget.empty()) return;
    std::unique_lock lock(mutex_);
    ++record_locked(e.actor).uses[widget];
}

void LearnerStore::apply(const ActivityEvent& e) {
    switch (e.verb) {
        case Verb::competence_set:
        case Verb::goal_set: {
            const auto c = competence_from_json(e.details);
            std::unique_lock lock(mutex_);
            auto& rec = record_locked(e.actor);
            auto& target = e.verb == Verb::competence_set ? rec.acquired : rec.goals;
            target.insert_or_assign(key_of(c), c);
            break;
        }
        case Verb::technique_apply: {
            std::unique_lock lock(mutex_);
            record_locked(e.actor).applies.push_back({e.ts, e.object_id});
            break;
        }
        case Verb::learner_parameter: {
            std::unique_lock lock(mutex_);
            record_locked(e.actor).parameters[e.object_id] = e.details.value("value", std::string{});
            break;
        }
        case Verb::widget_add:
        case Verb::widget_load:
            observe(e);
            break;
        default:
            break;
    }
}

}  // namespace role
