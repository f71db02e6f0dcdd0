#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "role/catalog.hpp"
#include "role/clock.hpp"
#include "role/event_log.hpp"

namespace role {

// Grid units; the space grid is `grid_columns` wide and unbounded downwards.
struct Layout {
    int x = 0;
    int y = 0;
    int width = 2;
    int height = 2;
    bool operator==(const Layout&) const = default;
};

inline constexpr int grid_columns = 12;

nlohmann::json to_json(const Layout& l);
Layout layout_from_json(const nlohmann::json& j);

struct WidgetInstance {
    std::string instance_id;
    std::string widget_id;
    Layout layout;
    std::string added_by;
    Timestamp added_at = 0;
    std::uint64_t load_count = 0;
    bool operator==(const WidgetInstance&) const = default;
};

struct Activity {
    std::string name;
    std::vector<WidgetInstance> widgets;
    bool operator==(const Activity&) const = default;
};

inline constexpr std::string_view default_activity = "Start";

struct Space {
    std::string name;
    std::string owner;
    std::vector<std::string> members;  // join order, earliest first
    std::vector<Activity> activities;
    std::map<std::string, nlohmann::json> shared_store;
    Timestamp created_at = 0;
    std::uint64_t load_count = 0;
    std::set<std::int64_t> load_days;  // day numbers (UTC)
    std::uint64_t next_instance = 1;

    bool operator==(const Space&) const = default;

    bool is_member(std::string_view learner) const;
    const WidgetInstance* find_instance(std::string_view instance_id) const;
    WidgetInstance* find_instance(std::string_view instance_id);
    std::size_t widget_count() const;
};

nlohmann::ordered_json to_json(const Space& s);

bool is_valid_space_name(std::string_view name);

// First free row-major slot for a default-sized widget in `activity`.
Layout first_free_slot(const Activity& activity);

// Applies one logged event to a space map; used for replay and recovery.
void apply_space_event(std::map<std::string, Space, std::less<>>& spaces, const ActivityEvent& e);

std::map<std::string, Space, std::less<>> replay_spaces(const std::vector<ActivityEvent>& events);

class SpaceService {
public:
    SpaceService(Catalog& catalog, EventLog& log, Clock clock = system_now);

    Space create_space(const std::string& name, const std::string& creator);
    Space join_space(std::string_view name, const std::string& learner);
    Space leave_space(std::string_view name, const std::string& learner);

    WidgetInstance add_widget(std::string_view space, std::string_view activity, std::string_view widget_id,
                              const std::string& actor);
    void remove_widget(std::string_view space, std::string_view instance_id, const std::string& actor);
    WidgetInstance load_widget(std::string_view space, std::string_view instance_id, const std::string& actor);

    // Counts a load and returns the full space view.
    nlohmann::ordered_json load_space(std::string_view space, const std::string& actor);

    void set_layout(std::string_view space, std::string_view instance_id, const Layout& layout,
                    const std::string& actor);
    void put_shared(std::string_view space, const std::string& key, const nlohmann::json& value,
                    const std::string& actor);

    std::string share_url(std::string_view space) const;

    // Snapshot without side effects.
    Space get(std::string_view space) const;
    bool exists(std::string_view space) const;
    bool is_member(std::string_view space, std::string_view learner) const;
    std::vector<std::string> space_names() const;
    std::map<std::string, Space, std::less<>> snapshot() const;

    // Replaces state with the replay of `events`; emits nothing.
    void restore(const std::vector<ActivityEvent>& events);

private:
    struct Entry {
        std::mutex mutex;
        Space space;
    };

    Entry& entry(std::string_view name) const;
    void emit(Space& s, Verb verb, const std::string& actor, std::string object_type, std::string object_id,
              nlohmann::json details = nlohmann::json::object());

    Catalog& catalog_;
    EventLog& log_;
    Clock clock_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::unique_ptr<Entry>, std::less<>> spaces_;
};

}  // namespace role
