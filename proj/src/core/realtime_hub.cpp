#include "role/realtime_hub.hpp"

#include <array>

#include "role/error.hpp"

namespace role {

namespace {

constexpr std::array<std::string_view, 6> kind_names{"sub", "unsub", "pub", "chat", "presence", "error"};

}  // namespace

std::string_view to_string(FrameKind k) { return kind_names[static_cast<std::size_t>(k)]; }

std::optional<FrameKind> parse_frame_kind(std::string_view s) {
    for (std::size_t i = 0; i < kind_names.size(); ++i)
        if (kind_names[i] == s) return static_cast<FrameKind>(i);
    return std::nullopt;
}

nlohmann::ordered_json to_json(const Frame& f) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(f.kind);
    if (!f.topic.empty()) j["topic"] = f.topic;
    if (!f.payload.is_null()) j["payload"] = nlohmann::ordered_json::parse(f.payload.dump());
    if (f.seq != 0) j["seq"] = f.seq;
    if (f.publisher != 0) j["publisher"] = f.publisher;
    if (!f.learner.empty()) j["learner"] = f.learner;
    if (!f.space.empty()) j["space"] = f.space;
    if (f.ts != 0) j["ts"] = f.ts;
    return j;
}

Frame frame_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::parse_error, "frame must be a JSON object");
    Frame f;
    const auto kind = j.value("kind", std::string{});
    auto k = parse_frame_kind(kind);
    if (!k) throw Error(ErrorCode::parse_error, "unknown frame kind '" + kind + "'");
    f.kind = *k;
    try {
        f.topic = j.value("topic", std::string{});
        if (auto it = j.find("payload"); it != j.end()) f.payload = *it;
        f.seq = j.value("seq", std::uint64_t{0});
        f.publisher = j.value("publisher", ConnectionId{0});
        f.learner = j.value("learner", std::string{});
        f.space = j.value("space", std::string{});
        f.ts = j.value("ts", Timestamp{0});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("frame: ") + e.what());
    }
    return f;
}

RealtimeHub::RealtimeHub(MembershipCheck is_member, EventLog& log, Clock clock)
    : is_member_(std::move(is_member)), log_(log), clock_(std::move(clock)) {}

RealtimeHub::Connection& RealtimeHub::open_connection(ConnectionId conn) {
    auto it = connections_.find(conn);
    if (it == connections_.end())
        throw Error(ErrorCode::connection_closed, "connection " + std::to_string(conn) + " is closed");
    return it->second;
}

void RealtimeHub::deliver(ConnectionId, Connection& c, const Frame& f) {
    if (c.sink)
        c.sink(f);
    else
        c.mailbox.push_back(f);
}

void RealtimeHub::broadcast_presence(const std::string& space) {
    Frame f;
    f.kind = FrameKind::presence;
    f.space = space;
    f.ts = clock_();
    auto online = nlohmann::json::array();
    if (auto it = presence_.find(space); it != presence_.end())
        for (const auto& [learner, n] : it->second) online.push_back(learner);
    f.payload = {{"online", online}};
    for (auto& [id, c] : connections_)
        if (c.space == space) deliver(id, c, f);
}

ConnectionId RealtimeHub::connect(const std::string& learner, const std::string& space, Sink sink) {
    if (!is_member_(space, learner))
        throw Error(ErrorCode::not_a_member, learner + " is not a member of '" + space + "'");
    std::lock_guard lock(mutex_);
    const ConnectionId id = next_id_++;
    connections_.emplace(id, Connection{learner, space, {}, {}, {}, std::move(sink)});
    if (presence_[space][learner]++ == 0) broadcast_presence(space);
    return id;
}

void RealtimeHub::disconnect(ConnectionId conn) {
    std::lock_guard lock(mutex_);
    auto it = connections_.find(conn);
    if (it == connections_.end()) return;
    const auto learner = it->second.learner;
    const auto space = it->second.space;
    connections_.erase(it);
    auto& online = presence_[space];
    if (--online[learner] == 0) {
        online.erase(learner);
        broadcast_presence(space);
    }
}

std::size_t RealtimeHub::evict(std::string_view space, std::string_view learner) {
    std::lock_guard lock(mutex_);
    Frame f;
    f.kind = FrameKind::error;
    f.learner = std::string(learner);
    f.space = std::string(space);
    f.ts = clock_();
    f.payload = {{"error", to_string(ErrorCode::not_a_member)},
                 {"message", f.learner + " is no longer a member of '" + f.space + "'"}};
    std::size_t closed = 0;
    for (auto it = connections_.begin(); it != connections_.end();) {
        if (it->second.space == space && it->second.learner == learner) {
            deliver(it->first, it->second, f);
            it = connections_.erase(it);
            ++closed;
        } else {
            ++it;
        }
    }
    if (closed == 0) return 0;
    auto p = presence_.find(space);
    if (p != presence_.end()) {
        p->second.erase(f.learner);
        broadcast_presence(f.space);
    }
    return closed;
}

void RealtimeHub::subscribe(ConnectionId conn, const std::string& topic, bool self_delivery) {
    if (topic.empty()) throw Error(ErrorCode::validation_error, "topic must be non-empty");
    std::lock_guard lock(mutex_);
    open_connection(conn).topics[topic] = self_delivery;
}

void RealtimeHub::unsubscribe(ConnectionId conn, const std::string& topic) {
    std::lock_guard lock(mutex_);
    open_connection(conn).topics.erase(topic);
}

std::uint64_t RealtimeHub::publish(ConnectionId conn, const std::string& topic, const nlohmann::json& payload,
                                   std::optional<std::uint64_t> client_seq) {
    if (topic.empty()) throw Error(ErrorCode::validation_error, "topic must be non-empty");
    Frame f;
    {
        std::lock_guard lock(mutex_);
        auto& pub = open_connection(conn);
        auto& last = pub.seq[topic];
        if (client_seq) {
            if (*client_seq <= last) return 0;
            last = *client_seq;
        } else {
            ++last;
        }
        f.kind = FrameKind::pub;
        f.topic = topic;
        f.payload = payload;
        f.seq = last;
        f.publisher = conn;
        f.learner = pub.learner;
        f.space = pub.space;
        f.ts = clock_();
        for (auto& [id, c] : connections_) {
            if (c.space != pub.space) continue;
            auto t = c.topics.find(topic);
            if (t == c.topics.end()) continue;
            if (id == conn && !t->second) continue;
            deliver(id, c, f);
        }
    }
    ActivityEvent e;
    e.ts = f.ts;
    e.actor = f.learner;
    e.verb = Verb::iwc_publish;
    e.object_type = topic;
    e.object_id = std::to_string(conn) + ":" + std::to_string(f.seq);
    e.space = f.space;
    e.details = {{"seq", f.seq}};
    if (payload.is_object() && payload.contains("widget_id")) e.details["widget_id"] = payload["widget_id"];
    log_.append(std::move(e));
    return f.seq;
}

ChatMessage RealtimeHub::chat_post(ConnectionId conn, const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error(ErrorCode::empty_message, "chat message is empty");
    ChatMessage msg;
    {
        std::lock_guard lock(mutex_);
        auto& c = open_connection(conn);
        msg = {c.space, c.learner, text, clock_()};
        ActivityEvent e;
        e.ts = msg.ts;
        e.actor = msg.learner;
        e.verb = Verb::chat_post;
        e.object_type = "chat";
        e.object_id = std::to_string(chat_[msg.space].size() + 1);
        e.space = msg.space;
        e.details = {{"text", text}};
        msg.ts = log_.append(std::move(e)).ts;
        chat_[msg.space].push_back(msg);

        Frame f;
        f.kind = FrameKind::chat;
        f.payload = {{"text", text}};
        f.learner = msg.learner;
        f.space = msg.space;
        f.publisher = conn;
        f.ts = msg.ts;
        for (auto& [id, other] : connections_)
            if (other.space == msg.space) deliver(id, other, f);
    }
    return msg;
}

std::vector<ChatMessage> RealtimeHub::chat_history(std::string_view space, std::size_t limit) const {
    std::lock_guard lock(mutex_);
    auto it = chat_.find(space);
    if (it == chat_.end()) return {};
    const auto& all = it->second;
    const auto start = all.size() > limit ? all.size() - limit : 0;
    return {all.begin() + static_cast<std::ptrdiff_t>(start), all.end()};
}

std::set<std::string> RealtimeHub::online(std::string_view space) const {
    std::lock_guard lock(mutex_);
    std::set<std::string> out;
    if (auto it = presence_.find(space); it != presence_.end())
        for (const auto& [learner, n] : it->second)
            if (n > 0) out.insert(learner);
    return out;
}

std::vector<Frame> RealtimeHub::drain(ConnectionId conn) {
    std::lock_guard lock(mutex_);
    auto& c = open_connection(conn);
    std::vector<Frame> out(c.mailbox.begin(), c.mailbox.end());
    c.mailbox.clear();
    return out;
}

bool RealtimeHub::is_open(ConnectionId conn) const {
    std::lock_guard lock(mutex_);
    return connections_.count(conn) != 0;
}

void RealtimeHub::restore(const std::vector<ActivityEvent>& events) {
    std::lock_guard lock(mutex_);
    chat_.clear();
    for (const auto& e : events)
        if (e.verb == Verb::chat_post && e.space)
            chat_[*e.space].push_back({*e.space, e.actor, e.details.value("text", std::string{}), e.ts});
}

}  // namespace role
