#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "role/clock.hpp"
#include "role/event_log.hpp"

namespace role {

using ConnectionId = std::uint64_t;

enum class FrameKind { sub, unsub, pub, chat, presence, error };

std::string_view to_string(FrameKind k);
std::optional<FrameKind> parse_frame_kind(std::string_view s);

// Wire frame of the /rt channel. Client frames use kind/topic/payload/seq;
// server frames also carry publisher, learner, space and ts.
struct Frame {
    FrameKind kind = FrameKind::pub;
    std::string topic;
    nlohmann::json payload;
    std::uint64_t seq = 0;
    ConnectionId publisher = 0;
    std::string learner;
    std::string space;
    Timestamp ts = 0;
    bool operator==(const Frame&) const = default;
};

nlohmann::ordered_json to_json(const Frame& f);
Frame frame_from_json(const nlohmann::json& j);

struct ChatMessage {
    std::string space;
    std::string learner;
    std::string text;
    Timestamp ts = 0;
    bool operator==(const ChatMessage&) const = default;
};

// Per-space pub/sub channels, chat rooms and presence.
//
// Frames for a connection go to the sink given at connect time, or are
// queued in its mailbox for drain() when there is none. Sinks run with the hub
// lock held and must not call back into the hub.
class RealtimeHub {
public:
    using MembershipCheck = std::function<bool(std::string_view space, std::string_view learner)>;
    using Sink = std::function<void(const Frame&)>;

    RealtimeHub(MembershipCheck is_member, EventLog& log, Clock clock = system_now);

    ConnectionId connect(const std::string& learner, const std::string& space, Sink sink = {});
    void disconnect(ConnectionId conn);

    // Closes every connection of `learner` to `space`, e.g. after leaving it.
    // Each one first receives an error frame. Returns how many were closed.
    std::size_t evict(std::string_view space, std::string_view learner);

    void subscribe(ConnectionId conn, const std::string& topic, bool self_delivery = false);
    void unsubscribe(ConnectionId conn, const std::string& topic);

    // Returns the sequence number assigned to the message; 0 if `client_seq`
    // was given and is not newer than the last one (duplicate, dropped).
    std::uint64_t publish(ConnectionId conn, const std::string& topic, const nlohmann::json& payload,
                          std::optional<std::uint64_t> client_seq = std::nullopt);

    ChatMessage chat_post(ConnectionId conn, const std::string& text);
    std::vector<ChatMessage> chat_history(std::string_view space, std::size_t limit) const;

    // Learners with at least one open connection to `space`.
    std::set<std::string> online(std::string_view space) const;

    std::vector<Frame> drain(ConnectionId conn);
    bool is_open(ConnectionId conn) const;

    // Rebuilds chat history from logged chat.post events.
    void restore(const std::vector<ActivityEvent>& events);

private:
    struct Connection {
        std::string learner;
        std::string space;
        std::map<std::string, bool> topics;  // topic -> self delivery
        std::map<std::string, std::uint64_t> seq;
        std::deque<Frame> mailbox;
        Sink sink;
    };

    Connection& open_connection(ConnectionId conn);
    void deliver(ConnectionId to, Connection& c, const Frame& f);
    void broadcast_presence(const std::string& space);

    MembershipCheck is_member_;
    EventLog& log_;
    Clock clock_;
    mutable std::mutex mutex_;
    ConnectionId next_id_ = 1;
    std::map<ConnectionId, Connection> connections_;
    std::map<std::string, std::map<std::string, int>, std::less<>> presence_;  // space -> learner -> refcount
    std::map<std::string, std::vector<ChatMessage>, std::less<>> chat_;
};

}  // namespace role
