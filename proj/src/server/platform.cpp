#include "role/server/platform.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "role/analytics/access_log.hpp"
#include "role/error.hpp"

namespace role::server {

namespace {

using oj = nlohmann::ordered_json;
using json = nlohmann::json;

std::vector<std::string> segments(std::string_view path) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < path.size()) {
        const auto next = path.find('/', pos);
        const auto end = next == std::string_view::npos ? path.size() : next;
        if (end > pos) out.push_back(analytics::url_decode(path.substr(pos, end - pos)));
        pos = end + 1;
    }
    return out;
}

oj ordered(const json& j) { return oj::parse(j.dump()); }

json parse_body(const ApiRequest& r) {
    if (r.body.empty()) return json::object();
    try {
        return json::parse(r.body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("request body: ") + e.what());
    }
}

std::string required(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string() || it->get<std::string>().empty())
        throw Error(ErrorCode::validation_error, std::string("missing string field '") + key + "'");
    return it->get<std::string>();
}

std::size_t size_param(const ApiRequest& r, const char* key, std::size_t fallback) {
    const auto v = r.query(key);
    if (!v) return fallback;
    try {
        const long long n = std::stoll(*v);
        if (n < 0) throw std::invalid_argument("negative");
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw Error(ErrorCode::validation_error, std::string("'") + key + "' must be a non-negative integer");
    }
}

ApiResponse ok(oj body, int status = 200) { return {status, std::move(body), {}}; }

oj widget_json(const WidgetDescriptor& w) {
    return {{"id", w.id},
            {"title", w.title},
            {"description", w.description},
            {"launch_url", w.launch_url},
            {"techniques", w.techniques},
            {"categories", w.categories},
            {"srl", w.srl},
            {"add_count", w.add_count}};
}

oj widgets_json(const std::vector<WidgetDescriptor>& ws) {
    oj out = oj::array();
    for (const auto& w : ws) out.push_back(widget_json(w));
    return out;
}

oj instance_json(const std::string& space, const WidgetInstance& w) {
    return {{"space", space},
            {"instance_id", w.instance_id},
            {"widget_id", w.widget_id},
            {"layout", ordered(to_json(w.layout))},
            {"added_by", w.added_by},
            {"added_at", w.added_at},
            {"load_count", w.load_count}};
}

oj record_json(const LearnerRecord& r) {
    auto competences = [](const std::map<CompetenceKey, Competence>& m) {
        oj out = oj::array();
        for (const auto& [k, c] : m) out.push_back(ordered(to_json(c)));
        return out;
    };
    oj applies = oj::array();
    for (const auto& a : r.applies) applies.push_back({{"ts", a.ts}, {"technique", a.technique}});
    return {{"learner", r.learner_id},
            {"acquired", competences(r.acquired)},
            {"goals", competences(r.goals)},
            {"uses", r.uses},
            {"applications", applies},
            {"parameters", r.parameters}};
}

oj recommendations_json(const std::vector<Recommendation>& recs) {
    oj out = oj::array();
    for (const auto& r : recs) out.push_back(to_json(r));
    return out;
}

EventSignature signature_param(const ApiRequest& r) {
    EventSignature sig;
    sig.verb = r.query("verb").value_or("");
    sig.object_type = r.query("object_type").value_or("");
    if (auto w = r.query("widget"); w && !w->empty()) sig.widget = *w;
    if (sig.verb.empty()) throw Error(ErrorCode::validation_error, "missing 'verb'");
    return sig;
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::parse_error, "cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

// --- request ----------------------------------------------------------------

std::string ApiRequest::path() const { return target.substr(0, target.find('?')); }

std::optional<std::string> ApiRequest::query(std::string_view key) const {
    analytics::AccessLogEntry e;
    e.target = target;
    return e.query_param(key);
}

std::optional<std::string> ApiRequest::header(std::string_view name) const {
    auto it = headers.find(std::string(name));
    if (it == headers.end()) return std::nullopt;
    return it->second;
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse_error:
        case ErrorCode::validation_error:
        case ErrorCode::config_parse_error:
        case ErrorCode::invalid_name:
        case ErrorCode::empty_message:
            return 400;
        case ErrorCode::unauthorized: return 401;
        case ErrorCode::not_a_member: return 403;
        case ErrorCode::unknown_strategy:
        case ErrorCode::unknown_entity:
        case ErrorCode::unknown_widget:
        case ErrorCode::unknown_technique:
        case ErrorCode::unknown_catalog_reference:
        case ErrorCode::unknown_learner:
        case ErrorCode::unknown_space:
        case ErrorCode::unknown_instance:
            return 404;
        case ErrorCode::name_taken:
        case ErrorCode::last_member:
        case ErrorCode::stale_recommendation:
        case ErrorCode::non_monotonic_timestamp:
            return 409;
        case ErrorCode::connection_closed: return 410;
        case ErrorCode::corpus_unavailable: return 503;
    }
    return 500;
}

// --- tokens -----------------------------------------------------------------

std::string TokenStore::issue(const std::string& learner) {
    static thread_local std::mt19937_64 rng{std::random_device{}() ^ (std::random_device{}() << 1)};
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    std::lock_guard lock(mutex_);
    tokens_[buf] = learner;
    return buf;
}

std::optional<std::string> TokenStore::learner_of(std::string_view token) const {
    std::lock_guard lock(mutex_);
    auto it = tokens_.find(token);
    if (it == tokens_.end()) return std::nullopt;
    return it->second;
}

// --- activity recommender ---------------------------------------------------

ActivityRecommender::ActivityRecommender(const Catalog& catalog, std::optional<std::filesystem::path> file,
                                         SchedulerConfig config)
    : catalog_(catalog), file_(std::move(file)), config_(config) {
    if (!file_ || !std::filesystem::exists(*file_)) return;
    std::ifstream in(*file_);
    try {
        const auto doc = json::parse(in);
        for (const auto& s : doc.at("learners")) {
            auto state = scheduler_state_from_json(s);
            states_[state.learner] = std::move(state);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, file_->string() + ": " + e.what());
    }
}

void ActivityRecommender::save_locked() const {
    if (!file_) return;
    oj doc;
    doc["learners"] = oj::array();
    for (const auto& [id, s] : states_) doc["learners"].push_back(to_json(s));
    write_atomically(*file_, doc.dump(2) + "\n");
}

ActivityStep ActivityRecommender::next(const std::string& learner) {
    std::lock_guard lock(mutex_);
    auto& state = states_[learner];
    state.learner = learner;
    auto step = next_activity(catalog_, state);
    state = step.state;
    save_locked();
    return step;
}

OutcomeResult ActivityRecommender::outcome(const std::string& learner, const std::string& item, Outcome o,
                                           const LearnerRecord* record) {
    std::lock_guard lock(mutex_);
    auto& state = states_[learner];
    state.learner = learner;
    Recommendation rec;
    rec.kind = RecommendationKind::activity;
    rec.item_id = item;
    auto result = record_outcome(catalog_, state, rec, o, record, config_);
    state = result.state;
    save_locked();
    return result;
}

SchedulerState ActivityRecommender::state(const std::string& learner) const {
    std::lock_guard lock(mutex_);
    auto it = states_.find(learner);
    if (it != states_.end()) return it->second;
    SchedulerState fresh;
    fresh.learner = learner;
    return fresh;
}

// --- platform ---------------------------------------------------------------

namespace {

std::unique_ptr<EventLog> open_log(const PlatformConfig& c) {
    if (!c.data_dir) return std::make_unique<EventLog>();
    std::filesystem::create_directories(*c.data_dir);
    return std::make_unique<EventLog>(*c.data_dir / "events.jsonl");
}

std::optional<std::filesystem::path> scheduler_file(const PlatformConfig& c) {
    if (!c.data_dir) return std::nullopt;
    return *c.data_dir / "scheduler.json";
}

}  // namespace

Platform::Platform(PlatformConfig config)
    : config_(std::move(config)),
      catalog_(load_catalog(config_.catalog)),
      log_(open_log(config_)),
      spaces_(catalog_, *log_, config_.clock),
      learners_(catalog_, *log_, config_.clock),
      hub_([this](std::string_view space, std::string_view learner) { return spaces_.is_member(space, learner); },
           *log_, config_.clock),
      assignments_(catalog_),
      activities_(catalog_, scheduler_file(config_), config_.scheduler) {
    if (config_.corpus) corpus_ = load_corpus(*config_.corpus);
    restore();
    log_->on_append([this](const ActivityEvent& e) { learners_.observe(e); });
}

void Platform::restore() {
    const auto events = log_->snapshot();
    spaces_.restore(events);
    hub_.restore(events);
    for (const auto& e : events) {
        learners_.apply(e);
        if (e.verb == Verb::widget_add) {
            const auto widget = e.details.value("widget_id", std::string{});
            if (catalog_.has_widget(widget)) catalog_.record_widget_added(widget);
        }
        if (e.verb == Verb::technique_apply && e.details.contains("signature")) {
            try {
                assignments_.assign(e.actor, signature_from_json(e.details["signature"]), e.object_id, e.ts);
            } catch (const Error&) {
                // assignment to a technique the current catalog no longer has
            }
        }
    }
}

std::vector<ActivityEvent> Platform::monitor_events(std::string_view learner) const {
    std::vector<ActivityEvent> out;
    for (auto& e : log_->by_actor(learner, std::numeric_limits<std::size_t>::max())) {
        switch (e.verb) {
            case Verb::technique_apply:
            case Verb::learner_parameter:
            case Verb::recommendation_shown:
            case Verb::recommendation_accepted:
            case Verb::recommendation_skipped:
                continue;
            default:
                out.push_back(std::move(e));
        }
    }
    return out;
}

oj Platform::profile(std::string_view learner) const {
    const auto events = monitor_events(learner);
    oj sequence = oj::array();
    for (const auto& e : events) {
        const auto sig = signature_of(e);
        oj item = {{"ts", e.ts}, {"verb", to_string(e.verb)}, {"object_type", e.object_type},
                   {"object_id", e.object_id}, {"signature", to_json(sig)}};
        item["space"] = e.space ? oj(*e.space) : oj(nullptr);
        const auto technique = assignments_.suggest_technique(learner, sig);
        std::optional<std::string> strategy;
        std::string source = "none";
        if (technique)
            if (const auto* t = catalog_.find_technique(*technique)) {
                strategy = t->strategy;
                source = "assigned";
            }
        if (!strategy) {
            strategy = assignments_.default_strategy(sig);
            if (strategy) source = "default";
        }
        item["technique"] = source == "assigned" ? oj(*technique) : oj(nullptr);
        item["strategy"] = strategy ? oj(*strategy) : oj(nullptr);
        item["source"] = source;
        sequence.push_back(std::move(item));
    }
    const auto p = assignments_.strategy_profile(learner, events);
    oj strategies = oj::array();
    for (const auto& s : catalog_.strategies())
        strategies.push_back({{"strategy", s.id}, {"name", s.name}, {"phase", to_string(s.phase)}, {"count", p.counts.at(s.id)}});
    return {{"learner", learner},
            {"events", events.size()},
            {"sequence", sequence},
            {"strategies", strategies},
            {"unclassified", p.unclassified}};
}

ApiResponse Platform::handle(const ApiRequest& request) {
    try {
        return route(request);
    } catch (const ValidationError& e) {
        return {400, {{"error", to_string(e.code())}, {"message", e.what()}, {"problems", e.problems()}}, {}};
    } catch (const Error& e) {
        return {http_status(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}}, {}};
    } catch (const std::exception& e) {
        return {500, {{"error", "Internal"}, {"message", e.what()}}, {}};
    }
}

ApiResponse Platform::route(const ApiRequest& r) {
    const auto seg = segments(r.path());
    const auto& m = r.method;
    const auto n = seg.size();
    auto is = [&](std::initializer_list<std::string_view> parts) {
        if (parts.size() != n) return false;
        std::size_t i = 0;
        for (auto p : parts) {
            if (p != "*" && p != seg[i]) return false;
            ++i;
        }
        return true;
    };
    if (n == 0 || seg[0] != "api") throw Error(ErrorCode::unknown_entity, "no such resource");

    // --- public --------------------------------------------------------------
    if (m == "POST" && is({"api", "session"})) {
        const auto learner = required(parse_body(r), "learner");
        learners_.ensure(learner);
        return ok({{"token", tokens_.issue(learner)}, {"learner", learner}}, 201);
    }
    if (m == "GET" && n >= 2 && seg[1] == "catalog") {
        if (is({"api", "catalog"})) {
            oj phases = oj::array();
            for (auto p : all_phases) phases.push_back(to_string(p));
            return ok({{"catalog_version", catalog_.version()},
                       {"phases", phases},
                       {"strategies", catalog_.strategies().size()},
                       {"techniques", catalog_.techniques().size()},
                       {"categories", catalog_.categories().size()},
                       {"widgets", catalog_.widgets().size()}});
        }
        if (is({"api", "catalog", "phases"})) {
            oj out = oj::array();
            for (auto p : all_phases) {
                oj strategies = oj::array();
                for (const auto* s : catalog_.strategies_in(p)) strategies.push_back(s->id);
                out.push_back({{"id", to_string(p)}, {"strategies", strategies}});
            }
            return ok(out);
        }
        if (is({"api", "catalog", "strategies"})) {
            oj out = oj::array();
            for (const auto& s : catalog_.strategies())
                out.push_back({{"id", s.id}, {"name", s.name}, {"group", to_string(s.group)}, {"phase", to_string(s.phase)}});
            return ok(out);
        }
        if (is({"api", "catalog", "strategies", "*", "techniques"})) {
            oj out = oj::array();
            for (const auto& t : catalog_.techniques_for(seg[3]))
                out.push_back({{"id", t.id}, {"name", t.name}, {"strategy", t.strategy}});
            return ok(out);
        }
        if (is({"api", "catalog", "techniques"})) {
            oj out = oj::array();
            for (const auto& t : catalog_.techniques())
                out.push_back({{"id", t.id}, {"name", t.name}, {"strategy", t.strategy}});
            return ok(out);
        }
        if (is({"api", "catalog", "categories"})) {
            oj out = oj::array();
            for (const auto& c : catalog_.categories()) {
                oj phases = oj::array();
                for (auto p : c.phases) phases.push_back(to_string(p));
                out.push_back({{"id", c.id}, {"phases", phases}});
            }
            return ok(out);
        }
        if (is({"api", "catalog", "templates"})) {
            oj out = oj::array();
            for (const auto& t : catalog_.templates())
                out.push_back({{"id", t.id}, {"title", t.title}, {"entities", t.entities}});
            return ok(out);
        }
        if (is({"api", "catalog", "bundles"})) {
            oj out = oj::array();
            for (const auto& b : catalog_.bundles()) out.push_back({{"id", b.id}, {"title", b.title}, {"widgets", b.widgets}});
            return ok(out);
        }
        if (is({"api", "catalog", "vocabularies"})) {
            oj out = oj::array();
            for (const auto& v : catalog_.vocabularies()) out.push_back({{"id", v.id}, {"concepts", v.concepts}});
            return ok(out);
        }
        if (is({"api", "catalog", "widgets"})) {
            const auto q = r.query("q").value_or("");
            const auto category = r.query("category");
            return ok(widgets_json(category ? catalog_.search_widgets(q, *category) : catalog_.search_widgets(q)));
        }
        if (is({"api", "catalog", "widgets", "*"})) {
            auto w = catalog_.find_widget(seg[3]);
            if (!w) throw Error(ErrorCode::unknown_widget, "unknown widget '" + seg[3] + "'");
            return ok(widget_json(*w));
        }
        if (is({"api", "catalog", "entities", "*", "widgets"})) return ok(widgets_json(catalog_.widgets_for(seg[3])));
    }
    if (m == "GET" && is({"api", "widgets", "*", "paradata"})) {
        if (!catalog_.has_widget(seg[2])) throw Error(ErrorCode::unknown_widget, "unknown widget '" + seg[2] + "'");
        return ok({{"widget", seg[2]}, {"add_count", catalog_.add_count(seg[2])}});
    }

    // --- authenticated -------------------------------------------------------
    const auto auth = r.header("authorization").value_or("");
    std::optional<std::string> who;
    if (auth.starts_with("Bearer ")) who = tokens_.learner_of(std::string_view(auth).substr(7));
    if (!who) throw Error(ErrorCode::unauthorized, "a valid bearer token is required");
    const std::string me = *who;
    auto self_only = [&](const std::string& learner) {
        if (learner != me) throw Error(ErrorCode::unauthorized, "token does not grant access to '" + learner + "'");
    };
    const auto now = config_.clock();

    if (n >= 3 && seg[1] == "learners") {
        self_only(seg[2]);
        const auto& id = seg[2];
        if (m == "GET" && n == 3) return ok(record_json(learners_.get(id)));
        if (m == "GET" && is({"api", "learners", "*", "feed"}))
            return ok(learners_.learner_feed(id, size_param(r, "last", 20)));
        if (m == "POST" && (is({"api", "learners", "*", "competences"}) || is({"api", "learners", "*", "goals"}))) {
            const auto c = competence_from_json(parse_body(r));
            const auto slot = seg[3] == "goals" ? CompetenceSlot::goal : CompetenceSlot::acquired;
            return ok(record_json(learners_.set_competence(id, c, slot)));
        }
        if (m == "POST" && is({"api", "learners", "*", "events"})) {
            const auto body = parse_body(r);
            if (body.contains("parameter")) {
                learners_.set_parameter(id, required(body, "parameter"), body.value("value", std::string{}));
            } else {
                const auto ts = body.contains("ts") ? body["ts"].get<Timestamp>() : now;
                learners_.record_application(id, required(body, "technique"), ts);
            }
            return ok(record_json(learners_.get(id)), 201);
        }
    }

    if (n >= 2 && seg[1] == "spaces") {
        if (n == 2 && m == "GET") return ok(spaces_.space_names());
        if (n == 2 && m == "POST") {
            auto name = r.query("name");
            if (!name) name = required(parse_body(r), "name");
            auto view = to_json(spaces_.create_space(*name, me));
            return {201, view, {{"name", *name}}};
        }
        const auto& space = seg[2];
        if (n == 3 && m == "GET") {
            if (!spaces_.exists(space)) throw Error(ErrorCode::unknown_space, "unknown space '" + space + "'");
            auto view = spaces_.load_space(space, me);
            view["is_member"] = spaces_.is_member(space, me);
            view["online"] = hub_.online(space);
            return ok(view);
        }
        if (n == 4 && seg[3] == "members" && m == "POST") return ok(to_json(spaces_.join_space(space, me)));
        if (n == 4 && seg[3] == "members" && m == "DELETE") {
            auto left = spaces_.leave_space(space, me);
            hub_.evict(space, me);
            return ok(to_json(left));
        }
        if (n == 4 && seg[3] == "widgets" && m == "POST") {
            const auto body = parse_body(r);
            auto widget = r.query("widget");
            if (!widget) widget = required(body, "widget");
            const auto activity = r.query("activity").value_or(body.value("activity", std::string(default_activity)));
            const auto w = spaces_.add_widget(space, activity, *widget, me);
            return {201, instance_json(space, w), {{"widget", *widget}}};
        }
        if (n == 5 && seg[3] == "widgets" && m == "GET") {
            const auto w = spaces_.load_widget(space, seg[4], me);
            return {200, instance_json(space, w), {{"widget", w.widget_id}}};
        }
        if (n == 5 && seg[3] == "widgets" && m == "DELETE") {
            const auto view = spaces_.get(space);
            const auto* w = view.find_instance(seg[4]);
            const std::string widget = w ? w->widget_id : "";
            spaces_.remove_widget(space, seg[4], me);
            ApiResponse res{200, {{"removed", seg[4]}}, {}};
            if (!widget.empty()) res.log_params.emplace_back("widget", widget);
            return res;
        }
        if (n == 6 && seg[3] == "widgets" && seg[5] == "layout" && (m == "PATCH" || m == "PUT")) {
            spaces_.set_layout(space, seg[4], layout_from_json(parse_body(r)), me);
            const auto view = spaces_.get(space);
            return ok(instance_json(space, *view.find_instance(seg[4])));
        }
        if (n == 5 && seg[3] == "store" && m == "PUT") {
            spaces_.put_shared(space, seg[4], parse_body(r), me);
            return ok({{"key", seg[4]}});
        }
        if (n == 4 && seg[3] == "share" && m == "GET") return ok({{"url", spaces_.share_url(space)}});
        if (n == 4 && seg[3] == "online" && m == "GET") {
            if (!spaces_.exists(space)) throw Error(ErrorCode::unknown_space, "unknown space '" + space + "'");
            return ok({{"space", space}, {"online", hub_.online(space)}});
        }
        if (n == 4 && seg[3] == "chat" && m == "GET") {
            if (!spaces_.is_member(space, me)) {
                if (!spaces_.exists(space)) throw Error(ErrorCode::unknown_space, "unknown space '" + space + "'");
                throw Error(ErrorCode::not_a_member, me + " is not a member of '" + space + "'");
            }
            oj out = oj::array();
            for (const auto& c : hub_.chat_history(space, size_param(r, "limit", 50)))
                out.push_back({{"learner", c.learner}, {"text", c.text}, {"ts", c.ts}});
            return ok(out);
        }
        if (n == 4 && seg[3] == "lint" && m == "GET") {
            const auto view = spaces_.get(space);
            const auto record = learners_.find(me);
            oj out = oj::array();
            for (const auto& f : lint_space(catalog_, view, record ? &*record : nullptr, config_.lint)) out.push_back(to_json(f));
            return ok({{"space", space}, {"findings", out}});
        }
    }

    if (n >= 3 && seg[1] == "recommend") {
        auto emit = [&](Verb verb, std::string type, std::string id, json details) {
            ActivityEvent e;
            e.ts = now;
            e.actor = me;
            e.verb = verb;
            e.object_type = std::move(type);
            e.object_id = std::move(id);
            e.details = std::move(details);
            log_->append(std::move(e));
        };
        if (m == "GET" && is({"api", "recommend", "widgets"})) {
            const auto learner = r.query("learner").value_or(me);
            self_only(learner);
            const auto entity = r.query("entity");
            if (!entity) throw Error(ErrorCode::validation_error, "missing 'entity'");
            const auto record = learners_.find(learner);
            const auto recs = recommend_widgets(catalog_, *entity, record ? &*record : nullptr);
            json items = json::array();
            for (const auto& x : recs) items.push_back(x.item_id);
            emit(Verb::recommendation_shown, "widget_list", *entity, {{"items", items}});
            return ok({{"entity", *entity}, {"learner", learner}, {"recommendations", recommendations_json(recs)}});
        }
        if (m == "POST" && is({"api", "recommend", "widgets", "accept"})) {
            const auto body = parse_body(r);
            Recommendation rec;
            rec.kind = RecommendationKind::widget;
            rec.item_id = required(body, "widget");
            rec.score = body.value("score", 0.0);
            if (!catalog_.has_widget(rec.item_id))
                throw Error(ErrorCode::unknown_widget, "unknown widget '" + rec.item_id + "'");
            const auto space = required(body, "space");
            const auto w = accept_widget_recommendation(spaces_, *log_, space, rec, me,
                                                        body.value("activity", std::string(default_activity)), config_.clock);
            return {201, instance_json(space, w), {}};
        }
        if (m == "GET" && is({"api", "recommend", "activity"})) {
            const auto step = activities_.next(me);
            emit(Verb::recommendation_shown, "strategy", step.recommendation.item_id, json::object());
            return ok({{"recommendation", to_json(step.recommendation)}, {"state", to_json(step.state)}});
        }
        if (m == "POST" && is({"api", "recommend", "activity"})) {
            const auto body = parse_body(r);
            const auto item = required(body, "item");
            const auto outcome = parse_outcome(required(body, "outcome"));
            if (!outcome) throw Error(ErrorCode::validation_error, "outcome must be accepted, skipped or drill_down");
            const auto record = learners_.find(me);
            const auto result = activities_.outcome(me, item, *outcome, record ? &*record : nullptr);
            const std::string type = catalog_.find_strategy(item) ? "strategy" : "technique";
            oj techniques = oj::array();
            for (const auto& t : result.techniques) techniques.push_back({{"id", t.id}, {"name", t.name}, {"strategy", t.strategy}});
            switch (*outcome) {
                case Outcome::accepted: emit(Verb::recommendation_accepted, type, item, json::object()); break;
                case Outcome::skipped: emit(Verb::recommendation_skipped, type, item, json::object()); break;
                case Outcome::drill_down: {
                    json items = json::array();
                    for (const auto& t : result.techniques) items.push_back(t.id);
                    emit(Verb::recommendation_shown, "technique_list", item, {{"items", items}});
                    break;
                }
            }
            if (result.applied) learners_.record_application(me, *result.applied, std::max(now, [&] {
                const auto rec = learners_.get(me);
                return rec.applies.empty() ? now : rec.applies.back().ts;
            }()));
            return ok({{"outcome", to_string(*outcome)},
                       {"techniques", techniques},
                       {"applied", result.applied ? oj(*result.applied) : oj(nullptr)},
                       {"state", to_json(result.state)}});
        }
        if (m == "GET" && is({"api", "recommend", "content"})) {
            const auto learner = r.query("learner").value_or(me);
            self_only(learner);
            const auto recs = recommend_content(learners_.ensure(learner), corpus_ ? &*corpus_ : nullptr);
            json items = json::array();
            for (const auto& x : recs) items.push_back(x.item_id);
            emit(Verb::recommendation_shown, "content_list", learner, {{"items", items}});
            return ok({{"learner", learner}, {"recommendations", recommendations_json(recs)}});
        }
    }

    if (n == 4 && seg[1] == "monitor") {
        self_only(seg[2]);
        const auto& learner = seg[2];
        if (m == "GET" && seg[3] == "clusters") {
            oj out = oj::array();
            for (const auto& c : cluster_events(monitor_events(learner))) {
                const auto technique = assignments_.suggest_technique(learner, c.signature);
                const auto strategy = assignments_.default_strategy(c.signature);
                out.push_back({{"signature", to_json(c.signature)},
                               {"label", to_string(c.signature)},
                               {"occurrences", c.occurrences},
                               {"suggested_technique", technique ? oj(*technique) : oj(nullptr)},
                               {"default_strategy", strategy ? oj(*strategy) : oj(nullptr)}});
            }
            return ok({{"learner", learner}, {"clusters", out}});
        }
        if (m == "GET" && seg[3] == "suggest") {
            const auto sig = signature_param(r);
            const auto technique = assignments_.suggest_technique(learner, sig);
            const auto strategy = assignments_.default_strategy(sig);
            return ok({{"signature", to_json(sig)},
                       {"technique", technique ? oj(*technique) : oj(nullptr)},
                       {"default_strategy", strategy ? oj(*strategy) : oj(nullptr)}});
        }
        if (m == "POST" && seg[3] == "assign") {
            const auto body = parse_body(r);
            if (!body.contains("signature")) throw Error(ErrorCode::validation_error, "missing 'signature'");
            const auto sig = signature_from_json(body["signature"]);
            const auto technique = required(body, "technique");
            assignments_.assign(learner, sig, technique, now);
            const auto rec = learners_.ensure(learner);
            const auto ts = rec.applies.empty() ? now : std::max(now, rec.applies.back().ts);
            learners_.record_application(learner, technique, ts, {{"signature", to_json(sig)}, {"source", "monitor"}});
            return ok(profile(learner), 201);
        }
        if (m == "GET" && seg[3] == "profile") return ok(profile(learner));
    }

    throw Error(ErrorCode::unknown_entity, "no route for " + m + " " + r.path());
}

}  // namespace role::server
