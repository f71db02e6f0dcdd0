#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "role/clock.hpp"

namespace role {

enum class Verb {
    space_create,
    space_join,
    space_leave,
    space_load,
    widget_add,
    widget_remove,
    widget_load,
    widget_layout,
    space_store,
    chat_post,
    iwc_publish,
    competence_set,
    goal_set,
    technique_apply,
    learner_parameter,
    recommendation_shown,
    recommendation_accepted,
    recommendation_skipped,
};

std::string_view to_string(Verb v);
std::optional<Verb> parse_verb(std::string_view s);

// One line of the platform's append-only learning event log.
struct ActivityEvent {
    Timestamp ts = 0;
    std::string actor;
    Verb verb = Verb::space_load;
    std::string object_type;
    std::string object_id;
    std::optional<std::string> space;
    nlohmann::json details = nlohmann::json::object();

    bool operator==(const ActivityEvent&) const = default;
};

nlohmann::ordered_json to_json(const ActivityEvent& e);
ActivityEvent event_from_json(const nlohmann::json& j);

// Thread-safe append-only log, optionally mirrored to a JSON Lines file.
class EventLog {
public:
    using Listener = std::function<void(const ActivityEvent&)>;

    EventLog() = default;
    // Loads any existing events from `file`, then appends new ones to it.
    explicit EventLog(const std::filesystem::path& file);

    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    // Returns the event as stored; ts is raised to keep per-space order.
    ActivityEvent append(ActivityEvent e);

    std::vector<ActivityEvent> snapshot() const;
    std::vector<ActivityEvent> by_actor(std::string_view actor, std::size_t last_n) const;
    std::size_t size() const;

    void on_append(Listener listener);

private:
    mutable std::mutex mutex_;
    std::vector<ActivityEvent> events_;
    std::map<std::string, Timestamp, std::less<>> last_ts_by_space_;
    std::vector<Listener> listeners_;
    std::ofstream file_;
};

std::vector<ActivityEvent> read_event_lines(std::istream& in);

}  // namespace role
