#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "role/catalog.hpp"
#include "role/clock.hpp"
#include "role/error.hpp"
#include "role/event_log.hpp"
#include "role/learner_model.hpp"
#include "role/realtime_hub.hpp"
#include "role/recommender.hpp"
#include "role/space_service.hpp"
#include "role/srl_monitor.hpp"

namespace role::server {

struct ApiRequest {
    std::string method;
    std::string target;  // path plus optional query, as received
    std::map<std::string, std::string> headers;  // lower-case names
    std::string body;

    std::string path() const;
    std::optional<std::string> query(std::string_view key) const;
    std::optional<std::string> header(std::string_view name) const;
};

struct ApiResponse {
    int status = 200;
    nlohmann::ordered_json body = nlohmann::ordered_json::object();
    // Query parameters the access log adds to the target when absent, so
    // offline analysis sees e.g. which widget a load referred to.
    std::vector<std::pair<std::string, std::string>> log_params;
};

struct PlatformConfig {
    std::filesystem::path catalog;
    std::optional<std::filesystem::path> data_dir;  // events.jsonl, scheduler.json
    std::optional<std::filesystem::path> corpus;
    Clock clock = system_now;
    SchedulerConfig scheduler;
    LintConfig lint;
};

// Opaque bearer tokens mapped to learner ids.
class TokenStore {
public:
    std::string issue(const std::string& learner);
    std::optional<std::string> learner_of(std::string_view token) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string, std::less<>> tokens_;
};

// Per-learner activity scheduler state, kept on disk when a path is given.
class ActivityRecommender {
public:
    ActivityRecommender(const Catalog& catalog, std::optional<std::filesystem::path> file, SchedulerConfig config);

    ActivityStep next(const std::string& learner);
    OutcomeResult outcome(const std::string& learner, const std::string& item, Outcome outcome,
                          const LearnerRecord* record);
    SchedulerState state(const std::string& learner) const;

private:
    void save_locked() const;

    const Catalog& catalog_;
    std::optional<std::filesystem::path> file_;
    SchedulerConfig config_;
    mutable std::mutex mutex_;
    std::map<std::string, SchedulerState> states_;
};

// All services of a running platform behind one request handler.
class Platform {
public:
    explicit Platform(PlatformConfig config);

    ApiResponse handle(const ApiRequest& request);

    Catalog& catalog() { return catalog_; }
    EventLog& log() { return *log_; }
    SpaceService& spaces() { return spaces_; }
    LearnerStore& learners() { return learners_; }
    RealtimeHub& hub() { return hub_; }
    AssignmentStore& assignments() { return assignments_; }
    ActivityRecommender& activities() { return activities_; }
    TokenStore& tokens() { return tokens_; }
    const Clock& clock() const { return config_.clock; }

    // Events a learner's SRL profile is computed from.
    std::vector<ActivityEvent> monitor_events(std::string_view learner) const;

    nlohmann::ordered_json profile(std::string_view learner) const;

private:
    ApiResponse route(const ApiRequest& request);
    void restore();

    PlatformConfig config_;
    Catalog catalog_;
    std::unique_ptr<EventLog> log_;
    SpaceService spaces_;
    LearnerStore learners_;
    RealtimeHub hub_;
    AssignmentStore assignments_;
    ActivityRecommender activities_;
    TokenStore tokens_;
    std::optional<Corpus> corpus_;
};

int http_status(ErrorCode code);

}  // namespace role::server
