#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "role/catalog.hpp"
#include "role/learner_model.hpp"
#include "role/space_service.hpp"

namespace role {

enum class RecommendationKind { widget, activity, content };

std::string_view to_string(RecommendationKind k);

struct Recommendation {
    RecommendationKind kind = RecommendationKind::widget;
    std::string item_id;
    double score = 0;
    std::uint64_t add_count = 0;  // tie-break after score
    std::vector<std::string> reasons;
    bool operator==(const Recommendation&) const = default;
};

nlohmann::ordered_json to_json(const Recommendation& r);

// score desc, then add_count desc, then id asc
bool ranks_before(const Recommendation& a, const Recommendation& b);

// Widgets reachable from `entity`, ranked by 1 + the number of the learner's
// SRL goal strategies whose techniques the widget supports.
std::vector<Recommendation> recommend_widgets(const Catalog& catalog, std::string_view entity,
                                              const LearnerRecord* learner);

// Adds the recommended widget to the space, logging the acceptance first.
WidgetInstance accept_widget_recommendation(SpaceService& spaces, EventLog& log, std::string_view space,
                                            const Recommendation& rec, const std::string& actor,
                                            std::string_view activity = default_activity,
                                            const Clock& clock = system_now);

// --- activity scheduler ----------------------------------------------------

struct SchedulerConfig {
    int skip_cooldown = 3;
};

struct SchedulerState {
    std::string learner;
    std::map<std::string, std::uint64_t> counts;  // strategy -> accepted activities
    std::map<std::string, int> cooldowns;         // entity -> recommendations still blocked
    // accepts per strategy in the current window of one accept per strategy
    std::map<std::string, std::uint64_t> window;
    Phase cursor = Phase::plan;
    std::optional<std::string> pending;  // strategy of the last issued recommendation
    std::vector<std::string> drilled;    // techniques offered for `pending`
    bool operator==(const SchedulerState&) const = default;
};

nlohmann::ordered_json to_json(const SchedulerState& s);
SchedulerState scheduler_state_from_json(const nlohmann::json& j);

struct ActivityStep {
    Recommendation recommendation;
    SchedulerState state;
};

// Picks the next strategy: among strategies not on cooldown and accepted fewer
// than twice in the current window, those with the lowest accepted count; the
// first phase from the cursor holding one wins, catalog order breaks ties
// inside the phase.
ActivityStep next_activity(const Catalog& catalog, SchedulerState state);

enum class Outcome { accepted, skipped, drill_down };

std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

struct OutcomeResult {
    SchedulerState state;
    std::vector<Technique> techniques;        // drill-down offer
    std::optional<std::string> applied;       // technique to record in the learner model
};

OutcomeResult record_outcome(const Catalog& catalog, SchedulerState state, const Recommendation& rec,
                             Outcome outcome, const LearnerRecord* learner, const SchedulerConfig& config = {});

// --- content ---------------------------------------------------------------

struct LearningObject {
    std::string id;
    std::string title;
    std::string text;
    std::vector<std::string> concepts;
};

struct Corpus {
    std::vector<LearningObject> objects;
};

Corpus load_corpus(const std::filesystem::path& path);
Corpus corpus_from_json(const nlohmann::json& doc);

std::vector<Recommendation> recommend_content(const LearnerRecord& learner, const Corpus* corpus);

// --- mashup design lint ----------------------------------------------------

struct LintConfig {
    std::size_t max_widgets = 12;
};

enum class FindingKind { missing_phase_coverage, too_many_widgets, unfamiliar_tool };

std::string_view to_string(FindingKind k);

struct Finding {
    FindingKind kind;
    std::string subject;  // phase name, widget count or widget id
    bool operator==(const Finding&) const = default;
};

nlohmann::ordered_json to_json(const Finding& f);

std::vector<Finding> lint_space(const Catalog& catalog, const Space& space, const LearnerRecord* learner,
                                const LintConfig& config = {});

}  // namespace role
