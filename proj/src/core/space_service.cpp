#include "role/space_service.hpp"

#include <algorithm>
#include <cctype>

#include "role/error.hpp"

namespace role {

namespace {

bool overlaps(const Layout& a, const Layout& b) {
    return a.x < b.x + b.width && b.x < a.x + a.width && a.y < b.y + b.height && b.y < a.y + a.height;
}

void validate_layout(const Layout& l) {
    if (l.width < 1 || l.height < 1 || l.x < 0 || l.y < 0)
        throw Error(ErrorCode::validation_error, "layout needs x,y >= 0 and width,height >= 1");
}

Activity& activity_named(Space& s, std::string_view name) {
    auto it = std::find_if(s.activities.begin(), s.activities.end(),
                           [&](const Activity& a) { return a.name == name; });
    if (it != s.activities.end()) return *it;
    s.activities.push_back({std::string(name), {}});
    return s.activities.back();
}

// Earliest-joined remaining member inherits ownership.
void remove_member(Space& s, std::string_view learner) {
    s.members.erase(std::remove(s.members.begin(), s.members.end(), learner), s.members.end());
    if (s.owner == learner && !s.members.empty()) s.owner = s.members.front();
}

bool remove_instance(Space& s, std::string_view iid) {
    for (auto& a : s.activities) {
        auto it = std::find_if(a.widgets.begin(), a.widgets.end(),
                               [&](const WidgetInstance& w) { return w.instance_id == iid; });
        if (it != a.widgets.end()) {
            a.widgets.erase(it);
            return true;
        }
    }
    return false;
}

}  // namespace

nlohmann::json to_json(const Layout& l) {
    return {{"x", l.x}, {"y", l.y}, {"width", l.width}, {"height", l.height}};
}

Layout layout_from_json(const nlohmann::json& j) {
    try {
        return {j.at("x").get<int>(), j.at("y").get<int>(), j.at("width").get<int>(), j.at("height").get<int>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("layout: ") + e.what());
    }
}

bool Space::is_member(std::string_view learner) const {
    return std::find(members.begin(), members.end(), learner) != members.end();
}

const WidgetInstance* Space::find_instance(std::string_view iid) const {
    for (const auto& a : activities)
        for (const auto& w : a.widgets)
            if (w.instance_id == iid) return &w;
    return nullptr;
}

WidgetInstance* Space::find_instance(std::string_view iid) {
    return const_cast<WidgetInstance*>(std::as_const(*this).find_instance(iid));
}

std::size_t Space::widget_count() const {
    std::size_t n = 0;
    for (const auto& a : activities) n += a.widgets.size();
    return n;
}

nlohmann::ordered_json to_json(const Space& s) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["url"] = "/spaces/" + s.name;
    j["owner"] = s.owner;
    j["members"] = s.members;
    j["created_at"] = s.created_at;
    j["load_count"] = s.load_count;
    j["load_days"] = nlohmann::ordered_json::array();
    for (auto d : s.load_days) j["load_days"].push_back(day_string(d));
    j["activities"] = nlohmann::ordered_json::array();
    for (const auto& a : s.activities) {
        nlohmann::ordered_json act;
        act["name"] = a.name;
        act["widgets"] = nlohmann::ordered_json::array();
        for (const auto& w : a.widgets) {
            nlohmann::ordered_json wj;
            wj["instance_id"] = w.instance_id;
            wj["widget_id"] = w.widget_id;
            wj["layout"] = {{"x", w.layout.x}, {"y", w.layout.y}, {"width", w.layout.width}, {"height", w.layout.height}};
            wj["added_by"] = w.added_by;
            wj["added_at"] = w.added_at;
            wj["load_count"] = w.load_count;
            act["widgets"].push_back(std::move(wj));
        }
        j["activities"].push_back(std::move(act));
    }
    j["shared_store"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.shared_store) j["shared_store"][k] = nlohmann::ordered_json::parse(v.dump());
    return j;
}

bool is_valid_space_name(std::string_view name) {
    if (name.empty() || name.size() > 64) return false;
    return std::all_of(name.begin(), name.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~';
    });
}

Layout first_free_slot(const Activity& activity) {
    const Layout size{};
    for (int y = 0;; ++y)
        for (int x = 0; x + size.width <= grid_columns; ++x) {
            Layout candidate{x, y, size.width, size.height};
            if (std::none_of(activity.widgets.begin(), activity.widgets.end(),
                             [&](const WidgetInstance& w) { return overlaps(w.layout, candidate); }))
                return candidate;
        }
}

void apply_space_event(std::map<std::string, Space, std::less<>>& spaces, const ActivityEvent& e) {
    if (!e.space) return;
    if (e.verb == Verb::space_create) {
        Space s;
        s.name = *e.space;
        s.owner = e.actor;
        s.members = {e.actor};
        s.activities = {{std::string(default_activity), {}}};
        s.created_at = e.ts;
        spaces.insert_or_assign(s.name, std::move(s));
        return;
    }
    auto it = spaces.find(*e.space);
    if (it == spaces.end()) return;
    Space& s = it->second;
    switch (e.verb) {
        case Verb::space_join:
            if (!s.is_member(e.actor)) s.members.push_back(e.actor);
            break;
        case Verb::space_leave:
            remove_member(s, e.actor);
            break;
        case Verb::space_load:
            ++s.load_count;
            s.load_days.insert(day_number(e.ts));
            break;
        case Verb::widget_add: {
            const auto& d = e.details;
            WidgetInstance w;
            w.instance_id = d.at("instance_id").get<std::string>();
            w.widget_id = d.at("widget_id").get<std::string>();
            w.layout = layout_from_json(d.at("layout"));
            w.added_by = e.actor;
            w.added_at = e.ts;
            activity_named(s, d.at("activity").get<std::string>()).widgets.push_back(std::move(w));
            s.next_instance = d.value("next_instance", s.next_instance + 1);
            break;
        }
        case Verb::widget_remove:
            remove_instance(s, e.object_id);
            break;
        case Verb::widget_load:
            if (auto* w = s.find_instance(e.object_id)) ++w->load_count;
            break;
        case Verb::widget_layout:
            if (auto* w = s.find_instance(e.object_id)) w->layout = layout_from_json(e.details.at("layout"));
            break;
        case Verb::space_store:
            s.shared_store[e.object_id] = e.details.at("value");
            break;
        default:
            break;
    }
}

std::map<std::string, Space, std::less<>> replay_spaces(const std::vector<ActivityEvent>& events) {
    std::map<std::string, Space, std::less<>> spaces;
    for (const auto& e : events) apply_space_event(spaces, e);
    return spaces;
}

SpaceService::SpaceService(Catalog& catalog, EventLog& log, Clock clock)
    : catalog_(catalog), log_(log), clock_(std::move(clock)) {}

SpaceService::Entry& SpaceService::entry(std::string_view name) const {
    std::shared_lock lock(mutex_);
    auto it = spaces_.find(name);
    if (it == spaces_.end()) throw Error(ErrorCode::unknown_space, "unknown space '" + std::string(name) + "'");
    return *it->second;
}

void SpaceService::emit(Space& s, Verb verb, const std::string& actor, std::string object_type,
                        std::string object_id, nlohmann::json details) {
    ActivityEvent e;
    e.ts = clock_();
    e.actor = actor;
    e.verb = verb;
    e.object_type = std::move(object_type);
    e.object_id = std::move(object_id);
    e.space = s.name;
    e.details = std::move(details);
    log_.append(std::move(e));
}

Space SpaceService::create_space(const std::string& name, const std::string& creator) {
    if (!is_valid_space_name(name))
        throw Error(ErrorCode::invalid_name, "space name '" + name + "' is not URL-safe");
    std::unique_lock lock(mutex_);
    if (spaces_.count(name)) throw Error(ErrorCode::name_taken, "space '" + name + "' already exists");
    auto e = std::make_unique<Entry>();
    Space& s = e->space;
    s.name = name;
    s.owner = creator;
    s.members = {creator};
    s.activities = {{std::string(default_activity), {}}};
    ActivityEvent ev;
    ev.ts = clock_();
    ev.actor = creator;
    ev.verb = Verb::space_create;
    ev.object_type = "space";
    ev.object_id = name;
    ev.space = name;
    s.created_at = log_.append(std::move(ev)).ts;
    Space out = s;
    spaces_.emplace(name, std::move(e));
    return out;
}

Space SpaceService::join_space(std::string_view name, const std::string& learner) {
    auto& e = entry(name);
    std::lock_guard lock(e.mutex);
    if (!e.space.is_member(learner)) {
        e.space.members.push_back(learner);
        emit(e.space, Verb::space_join, learner, "learner", learner);
    }
    return e.space;
}

Space SpaceService::leave_space(std::string_view name, const std::string& learner) {
    auto& e = entry(name);
    std::lock_guard lock(e.mutex);
    Space& s = e.space;
    if (!s.is_member(learner))
        throw Error(ErrorCode::not_a_member, learner + " is not a member of '" + s.name + "'");
    if (s.members.size() == 1)
        throw Error(ErrorCode::last_member, "the last member cannot leave '" + s.name + "'");
    s.members.erase(std::find(s.members.begin(), s.members.end(), learner));
    if (s.owner == learner) s.owner = s.members.front();
    emit(s, Verb::space_leave, learner, "learner", learner);
    return s;
}

WidgetInstance SpaceService::add_widget(std::string_view space, std::string_view activity,
                                        std::string_view widget_id, const std::string& actor) {
    auto& e = entry(space);
    std::lock_guard lock(e.mutex);
    Space& s = e.space;
    if (!s.is_member(actor)) throw Error(ErrorCode::not_a_member, actor + " is not a member of '" + s.name + "'");
    if (!catalog_.has_widget(widget_id))
        throw Error(ErrorCode::unknown_widget, "unknown widget '" + std::string(widget_id) + "'");
    const std::string act = activity.empty() ? std::string(default_activity) : std::string(activity);

    WidgetInstance w;
    w.instance_id = "i" + std::to_string(s.next_instance++);
    w.widget_id = std::string(widget_id);
    w.added_by = actor;

    Activity& target = activity_named(s, act);
    w.layout = first_free_slot(target);
    catalog_.record_widget_added(widget_id);

    ActivityEvent ev;
    ev.ts = clock_();
    ev.actor = actor;
    ev.verb = Verb::widget_add;
    ev.object_type = "widget";
    ev.object_id = w.widget_id;
    ev.space = s.name;
    ev.details = {{"instance_id", w.instance_id},
                  {"widget_id", w.widget_id},
                  {"activity", act},
                  {"layout", to_json(w.layout)},
                  {"next_instance", s.next_instance}};
    w.added_at = log_.append(std::move(ev)).ts;
    target.widgets.push_back(w);
    return w;
}

void SpaceService::remove_widget(std::string_view space, std::string_view instance_id, const std::string& actor) {
    auto& e = entry(space);
    std::lock_guard lock(e.mutex);
    Space& s = e.space;
    if (!s.is_member(actor)) throw Error(ErrorCode::not_a_member, actor + " is not a member of '" + s.name + "'");
    const auto* w = s.find_instance(instance_id);
    if (!w) throw Error(ErrorCode::unknown_instance, "unknown widget instance '" + std::string(instance_id) + "'");
    const std::string widget_id = w->widget_id;
    remove_instance(s, instance_id);
    emit(s, Verb::widget_remove, actor, "instance", std::string(instance_id), {{"widget_id", widget_id}});
}

WidgetInstance SpaceService::load_widget(std::string_view space, std::string_view instance_id,
                                         const std::string& actor) {
    auto& e = entry(space);
    std::lock_guard lock(e.mutex);
    auto* w = e.space.find_instance(instance_id);
    if (!w) throw Error(ErrorCode::unknown_instance, "unknown widget instance '" + std::string(instance_id) + "'");
    ++w->load_count;
    emit(e.space, Verb::widget_load, actor, "instance", w->instance_id, {{"widget_id", w->widget_id}});
    return *w;
}

nlohmann::ordered_json SpaceService::load_space(std::string_view space, const std::string& actor) {
    auto& e = entry(space);
    std::lock_guard lock(e.mutex);
    Space& s = e.space;
    ActivityEvent ev;
    ev.ts = clock_();
    ev.actor = actor;
    ev.verb = Verb::space_load;
    ev.object_type = "space";
    ev.object_id = s.name;
    ev.space = s.name;
    const auto stored = log_.append(std::move(ev));
    ++s.load_count;
    s.load_days.insert(day_number(stored.ts));
    return to_json(s);
}

void SpaceService::set_layout(std::string_view space, std::string_view instance_id, const Layout& layout,
                              const std::string& actor) {
    validate_layout(layout);
    auto& e = entry(space);
    std::lock_guard lock(e.mutex);
    Space& s = e.space;
    auto* w = s.find_instance(instance_id);
    if (!w) throw Error(ErrorCode::unknown_instance, "unknown widget instance '" + std::string(instance_id) + "'");
    if (!s.is_member(actor)) throw Error(ErrorCode::not_a_member, actor + " is not a member of '" + s.name + "'");
    w->layout = layout;
    emit(s, Verb::widget_layout, actor, "instance", w->instance_id, {{"layout", to_json(layout)}});
}

void SpaceService::put_shared(std::string_view space, const std::string& key, const nlohmann::json& value,
                              const std::string& actor) {
    auto& e = entry(space);
    std::lock_guard lock(e.mutex);
    Space& s = e.space;
    if (!s.is_member(actor)) throw Error(ErrorCode::not_a_member, actor + " is not a member of '" + s.name + "'");
    s.shared_store[key] = value;
    emit(s, Verb::space_store, actor, "document", key, {{"value", value}});
}

std::string SpaceService::share_url(std::string_view space) const {
    if (!exists(space)) throw Error(ErrorCode::unknown_space, "unknown space '" + std::string(space) + "'");
    return "/spaces/" + std::string(space);
}

Space SpaceService::get(std::string_view space) const {
    auto& e = entry(space);
    std::lock_guard lock(e.mutex);
    return e.space;
}

bool SpaceService::exists(std::string_view space) const {
    std::shared_lock lock(mutex_);
    return spaces_.find(space) != spaces_.end();
}

bool SpaceService::is_member(std::string_view space, std::string_view learner) const {
    std::shared_lock lock(mutex_);
    auto it = spaces_.find(space);
    if (it == spaces_.end()) return false;
    std::lock_guard elock(it->second->mutex);
    return it->second->space.is_member(learner);
}

std::vector<std::string> SpaceService::space_names() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [name, _] : spaces_) out.push_back(name);
    return out;
}

std::map<std::string, Space, std::less<>> SpaceService::snapshot() const {
    std::shared_lock lock(mutex_);
    std::map<std::string, Space, std::less<>> out;
    for (const auto& [name, e] : spaces_) {
        std::lock_guard elock(e->mutex);
        out.emplace(name, e->space);
    }
    return out;
}

void SpaceService::restore(const std::vector<ActivityEvent>& events) {
    auto replayed = replay_spaces(events);
    std::unique_lock lock(mutex_);
    spaces_.clear();
    for (auto& [name, s] : replayed) {
        auto e = std::make_unique<Entry>();
        e->space = std::move(s);
        spaces_.emplace(name, std::move(e));
    }
}

}  // namespace role
