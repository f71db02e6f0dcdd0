#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "role/catalog.hpp"
#include "role/event_log.hpp"

namespace role {

// What an observable event looks like, independent of who did it and where.
struct EventSignature {
    std::string verb;
    std::string object_type;
    std::optional<std::string> widget;  // source widget, if known
    auto operator<=>(const EventSignature&) const = default;
};

EventSignature signature_of(const ActivityEvent& e);
std::string to_string(const EventSignature& s);
nlohmann::ordered_json to_json(const EventSignature& s);
EventSignature signature_from_json(const nlohmann::json& j);

struct ManualAssignment {
    std::string learner;
    EventSignature signature;
    std::string technique;
    Timestamp ts = 0;
};

// Default mapping entry; a signature without widget matches any source widget.
struct DefaultRule {
    EventSignature signature;
    std::string strategy;
};

// Names used for observed behaviour that are not strategy ids themselves.
const std::map<std::string, std::string, std::less<>>& strategy_aliases();

// Event to strategy table for the SRL Text Reader bundle events.
std::vector<DefaultRule> default_mapping();

struct StrategyProfile {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t unclassified = 0;
    bool operator==(const StrategyProfile&) const = default;
};

nlohmann::ordered_json to_json(const StrategyProfile& p);

struct EventCluster {
    EventSignature signature;
    std::uint64_t occurrences = 0;
    bool operator==(const EventCluster&) const = default;
};

// Group-by signature, largest group first, signature order breaks ties.
std::vector<EventCluster> cluster_events(const std::vector<ActivityEvent>& events);

class AssignmentStore {
public:
    explicit AssignmentStore(const Catalog& catalog, std::vector<DefaultRule> defaults = default_mapping());

    void assign(const std::string& learner, const EventSignature& sig, const std::string& technique, Timestamp ts);

    // Majority over the learner's own assignments, ties to the most recent;
    // falls back to all learners, then to nothing.
    std::optional<std::string> suggest_technique(std::string_view learner, const EventSignature& sig) const;

    std::optional<std::string> default_strategy(const EventSignature& sig) const;

    StrategyProfile strategy_profile(std::string_view learner, const std::vector<ActivityEvent>& events) const;

    std::vector<ManualAssignment> manual() const;

private:
    const Catalog& catalog_;
    std::vector<DefaultRule> defaults_;
    mutable std::mutex mutex_;
    std::vector<ManualAssignment> manual_;
};

}  // namespace role
