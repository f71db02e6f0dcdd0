#include "role/srl_monitor.hpp"

#include <algorithm>

#include "role/error.hpp"

namespace role {

namespace {

struct Vote {
    std::uint64_t count = 0;
    Timestamp last_ts = 0;
    std::size_t last_index = 0;
};

std::optional<std::string> majority(const std::map<std::string, Vote>& votes) {
    const std::pair<const std::string, Vote>* best = nullptr;
    for (const auto& entry : votes) {
        if (!best) {
            best = &entry;
            continue;
        }
        const auto& b = best->second;
        const auto& v = entry.second;
        if (v.count > b.count ||
            (v.count == b.count && std::tie(v.last_ts, v.last_index) > std::tie(b.last_ts, b.last_index)))
            best = &entry;
    }
    if (!best) return std::nullopt;
    return best->first;
}

}  // namespace

EventSignature signature_of(const ActivityEvent& e) {
    EventSignature s{std::string(to_string(e.verb)), e.object_type, std::nullopt};
    if (auto it = e.details.find("widget_id"); it != e.details.end() && it->is_string())
        s.widget = it->get<std::string>();
    return s;
}

std::string to_string(const EventSignature& s) {
    std::string out = s.verb + "/" + s.object_type;
    if (s.widget) out += "@" + *s.widget;
    return out;
}

nlohmann::ordered_json to_json(const EventSignature& s) {
    nlohmann::ordered_json j;
    j["verb"] = s.verb;
    j["object_type"] = s.object_type;
    j["widget"] = s.widget ? nlohmann::ordered_json(*s.widget) : nlohmann::ordered_json(nullptr);
    return j;
}

EventSignature signature_from_json(const nlohmann::json& j) {
    EventSignature s;
    try {
        s.verb = j.at("verb").get<std::string>();
        s.object_type = j.value("object_type", std::string{});
        if (auto it = j.find("widget"); it != j.end() && it->is_string()) s.widget = it->get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("signature: ") + e.what());
    }
    return s;
}

const std::map<std::string, std::string, std::less<>>& strategy_aliases() {
    static const std::map<std::string, std::string, std::less<>> aliases{
        {"self_evaluation", "self_monitoring"},
        {"self_reflection", "regulation"},
        {"enabling", "environment_preparation"},
    };
    return aliases;
}

std::vector<DefaultRule> default_mapping() {
    auto alias = [](const std::string& name) {
        const auto& a = strategy_aliases();
        auto it = a.find(name);
        return it == a.end() ? name : it->second;
    };
    return {
        {{"iwc.publish", "tag.add", std::nullopt}, "elaboration"},
        {{"iwc.publish", "tag.remove", std::nullopt}, "elaboration"},
        {{"competence.set", "competence", std::nullopt}, alias("self_evaluation")},
        {{"iwc.publish", "feedback.view", std::nullopt}, alias("self_reflection")},
        {{"widget.add", "widget", std::nullopt}, alias("enabling")},
    };
}

nlohmann::ordered_json to_json(const StrategyProfile& p) {
    nlohmann::ordered_json j;
    j["counts"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.counts) j["counts"][k] = v;
    j["unclassified"] = p.unclassified;
    return j;
}

std::vector<EventCluster> cluster_events(const std::vector<ActivityEvent>& events) {
    std::map<EventSignature, std::uint64_t> groups;
    for (const auto& e : events) ++groups[signature_of(e)];
    std::vector<EventCluster> out;
    out.reserve(groups.size());
    for (auto& [sig, n] : groups) out.push_back({sig, n});
    std::stable_sort(out.begin(), out.end(),
                     [](const EventCluster& a, const EventCluster& b) { return a.occurrences > b.occurrences; });
    return out;
}

AssignmentStore::AssignmentStore(const Catalog& catalog, std::vector<DefaultRule> defaults)
    : catalog_(catalog), defaults_(std::move(defaults)) {
    std::vector<std::string> problems;
    for (const auto& r : defaults_)
        if (!catalog_.find_strategy(r.strategy))
            problems.push_back("default mapping " + to_string(r.signature) + " targets unknown strategy '" +
                               r.strategy + "'");
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

void AssignmentStore::assign(const std::string& learner, const EventSignature& sig, const std::string& technique,
                             Timestamp ts) {
    if (!catalog_.find_technique(technique))
        throw Error(ErrorCode::unknown_technique, "unknown technique '" + technique + "'");
    std::lock_guard lock(mutex_);
    manual_.push_back({learner, sig, technique, ts});
}

std::optional<std::string> AssignmentStore::suggest_technique(std::string_view learner,
                                                              const EventSignature& sig) const {
    std::lock_guard lock(mutex_);
    std::map<std::string, Vote> own;
    std::map<std::string, Vote> global;
    for (std::size_t i = 0; i < manual_.size(); ++i) {
        const auto& a = manual_[i];
        if (a.signature != sig) continue;
        for (auto* votes : {&global, a.learner == learner ? &own : nullptr}) {
            if (!votes) continue;
            auto& v = (*votes)[a.technique];
            ++v.count;
            if (std::tie(a.ts, i) >= std::tie(v.last_ts, v.last_index)) {
                v.last_ts = a.ts;
                v.last_index = i;
            }
        }
    }
    if (!own.empty()) return majority(own);
    return majority(global);
}

std::optional<std::string> AssignmentStore::default_strategy(const EventSignature& sig) const {
    for (const auto& r : defaults_)
        if (r.signature == sig) return r.strategy;
    EventSignature any = sig;
    any.widget.reset();
    for (const auto& r : defaults_)
        if (!r.signature.widget && r.signature == any) return r.strategy;
    return std::nullopt;
}

StrategyProfile AssignmentStore::strategy_profile(std::string_view learner,
                                                  const std::vector<ActivityEvent>& events) const {
    StrategyProfile profile;
    for (const auto& s : catalog_.strategies()) profile.counts[s.id] = 0;
    for (const auto& e : events) {
        const auto sig = signature_of(e);
        std::optional<std::string> strategy;
        if (auto t = suggest_technique(learner, sig))
            if (const auto* tq = catalog_.find_technique(*t)) strategy = tq->strategy;
        if (!strategy) strategy = default_strategy(sig);
        if (strategy)
            ++profile.counts[*strategy];
        else
            ++profile.unclassified;
    }
    return profile;
}

std::vector<ManualAssignment> AssignmentStore::manual() const {
    std::lock_guard lock(mutex_);
    return manual_;
}

}  // namespace role
