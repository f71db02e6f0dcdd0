#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "role/catalog.hpp"
#include "role/clock.hpp"
#include "role/event_log.hpp"

namespace role {

enum class CompetenceSlot { acquired, goal };

struct Application {
    Timestamp ts = 0;
    std::string technique;
    bool operator==(const Application&) const = default;
};

struct LearnerRecord {
    std::string learner_id;
    std::map<CompetenceKey, Competence> acquired;
    std::map<CompetenceKey, Competence> goals;
    std::map<std::string, std::uint64_t> uses;  // widget id -> usage count
    std::vector<Application> applies;           // non-decreasing ts
    std::map<std::string, std::string> parameters;

    bool operator==(const LearnerRecord&) const = default;
};

struct GapEntry {
    CompetenceKey key;
    int have = 0;  // 0 when the competence was never acquired
    int want = 0;
    bool operator==(const GapEntry&) const = default;
};

using CompetenceGap = std::vector<GapEntry>;

// One entry per goal whose acquired level is missing or lower, ordered by key.
CompetenceGap competence_gap(const LearnerRecord& record);

// Applications per strategy, every catalog strategy present (zero if unused).
std::map<std::string, std::uint64_t> strategy_histogram(const Catalog& catalog, const LearnerRecord& record);

std::map<std::string, std::uint64_t> technique_counts(const LearnerRecord& record);

nlohmann::ordered_json to_json(const GapEntry& g);

class LearnerStore {
public:
    LearnerStore(const Catalog& catalog, EventLog& log, Clock clock = system_now);

    // Creates an empty record if none exists.
    LearnerRecord ensure(const std::string& learner);

    LearnerRecord set_competence(const std::string& learner, const Competence& c, CompetenceSlot slot);
    void record_application(const std::string& learner, std::string_view technique, Timestamp ts,
                            nlohmann::json details = nlohmann::json::object());
    void set_parameter(const std::string& learner, const std::string& key, const std::string& value);

    LearnerRecord get(std::string_view learner) const;
    std::optional<LearnerRecord> find(std::string_view learner) const;
    std::vector<std::string> learner_ids() const;

    CompetenceGap competence_gap(std::string_view learner) const;

    // Open learner model document.
    nlohmann::ordered_json learner_feed(std::string_view learner, std::size_t last_n = 20) const;

    // Rebuilds state from a logged event; usage is derived from widget.add/widget.load.
    void apply(const ActivityEvent& e);

    // Live hook for events emitted by other services (widget usage only).
    void observe(const ActivityEvent& e);

private:
    LearnerRecord& record_locked(const std::string& learner);

    const Catalog& catalog_;
    EventLog& log_;
    Clock clock_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, LearnerRecord, std::less<>> records_;
};

std::string competence_id(const CompetenceKey& key);

}  // namespace role
