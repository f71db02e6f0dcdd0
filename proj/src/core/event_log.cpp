#include "role/event_log.hpp"

#include <algorithm>
#include <array>

#include "role/error.hpp"

namespace role {

namespace {

constexpr std::array<std::string_view, 18> verb_names{
    "space.create",          "space.join",           "space.leave",       "space.load",
    "widget.add",            "widget.remove",        "widget.load",       "widget.layout",
    "space.store",           "chat.post",            "iwc.publish",       "competence.set",
    "goal.set",              "technique.apply",      "learner.parameter", "recommendation.shown",
    "recommendation.accepted", "recommendation.skipped"};

}  // namespace

std::string_view to_string(Verb v) { return verb_names[static_cast<std::size_t>(v)]; }

std::optional<Verb> parse_verb(std::string_view s) {
    for (std::size_t i = 0; i < verb_names.size(); ++i)
        if (verb_names[i] == s) return static_cast<Verb>(i);
    return std::nullopt;
}

nlohmann::ordered_json to_json(const ActivityEvent& e) {
    nlohmann::ordered_json j;
    j["ts"] = e.ts;
    j["actor"] = e.actor;
    j["verb"] = to_string(e.verb);
    j["object_type"] = e.object_type;
    j["object_id"] = e.object_id;
    j["space"] = e.space ? nlohmann::ordered_json(*e.space) : nlohmann::ordered_json(nullptr);
    j["details"] = nlohmann::ordered_json::parse(e.details.dump());
    return j;
}

ActivityEvent event_from_json(const nlohmann::json& j) {
    try {
        ActivityEvent e;
        e.ts = j.at("ts").get<Timestamp>();
        e.actor = j.at("actor").get<std::string>();
        const auto verb = j.at("verb").get<std::string>();
        auto v = parse_verb(verb);
        if (!v) throw Error(ErrorCode::parse_error, "unknown verb '" + verb + "'");
        e.verb = *v;
        e.object_type = j.value("object_type", "");
        e.object_id = j.value("object_id", "");
        if (auto it = j.find("space"); it != j.end() && !it->is_null()) e.space = it->get<std::string>();
        if (auto it = j.find("details"); it != j.end() && !it->is_null()) e.details = *it;
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::parse_error, std::string("malformed event: ") + ex.what());
    }
}

std::vector<ActivityEvent> read_event_lines(std::istream& in) {
    std::vector<ActivityEvent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(event_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::parse_error, "event log line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

EventLog::EventLog(const std::filesystem::path& file) {
    if (std::filesystem::exists(file)) {
        std::ifstream in(file);
        events_ = read_event_lines(in);
        for (const auto& e : events_)
            if (e.space) {
                auto& last = last_ts_by_space_[*e.space];
                last = std::max(last, e.ts);
            }
    }
    file_.open(file, std::ios::app);
    if (!file_) throw Error(ErrorCode::parse_error, "cannot open event log " + file.string());
}

ActivityEvent EventLog::append(ActivityEvent e) {
    std::vector<Listener> listeners;
    {
        std::lock_guard lock(mutex_);
        if (e.space) {
            auto [it, inserted] = last_ts_by_space_.try_emplace(*e.space, e.ts);
            if (!inserted) {
                e.ts = std::max(e.ts, it->second);
                it->second = e.ts;
            }
        }
        events_.push_back(e);
        if (file_.is_open()) {
            file_ << to_json(e).dump() << '\n';
            file_.flush();
        }
        listeners = listeners_;
    }
    for (const auto& l : listeners) l(e);
    return e;
}

std::vector<ActivityEvent> EventLog::snapshot() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::vector<ActivityEvent> EventLog::by_actor(std::string_view actor, std::size_t last_n) const {
    std::lock_guard lock(mutex_);
    std::vector<ActivityEvent> out;
    for (auto it = events_.rbegin(); it != events_.rend() && out.size() < last_n; ++it)
        if (it->actor == actor) out.push_back(*it);
    std::reverse(out.begin(), out.end());
    return out;
}

std::size_t EventLog::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

void EventLog::on_append(Listener listener) {
    std::lock_guard lock(mutex_);
    listeners_.push_back(std::move(listener));
}

}  // namespace role
