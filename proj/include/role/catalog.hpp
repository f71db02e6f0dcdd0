#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace role {

enum class Phase { plan, prepare, learn, reflect };

inline constexpr std::array<Phase, 4> all_phases{Phase::plan, Phase::prepare, Phase::learn,
                                                 Phase::reflect};

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view s);
Phase next_phase(Phase p);

enum class StrategyGroup { cognitive, meta_cognitive, resource_management };

std::string_view to_string(StrategyGroup g);
std::optional<StrategyGroup> parse_group(std::string_view s);

// The seven widget store categories.
inline constexpr std::array<std::string_view, 7> category_labels{
    "Search & Get Recommendation", "Plan & Organize",        "Communicate & Collaborate",
    "Create & Modify",             "Train & Test",           "Explore & View Content",
    "Reflect & Evaluate"};

struct Strategy {
    std::string id;
    std::string name;
    StrategyGroup group{};
    Phase phase{};
};

struct Technique {
    std::string id;
    std::string name;
    std::string strategy;
};

struct Category {
    std::string id;
    std::vector<Phase> phases;
};

// Concept vocabulary ("context") that domain competences point into.
struct Vocabulary {
    std::string id;
    std::vector<std::string> concepts;
};

struct WidgetDescriptor {
    std::string id;
    std::string title;
    std::string description;
    std::string launch_url;
    std::vector<std::string> techniques;
    std::vector<std::string> categories;
    bool srl = false;
    std::uint64_t add_count = 0;
};

struct WidgetBundle {
    std::string id;
    std::string title;
    std::vector<std::string> widgets;
};

// A set of phases, strategies and techniques offered as clickable entities
// by the mashup recommender.
struct Template {
    std::string id;
    std::string title;
    std::vector<std::string> entities;
};

// Proficiency on the European Qualifications Framework scale (1..8).
class EqfLevel {
public:
    static constexpr int min = 1;
    static constexpr int max = 8;

    explicit EqfLevel(int value);
    int value() const noexcept { return value_; }
    auto operator<=>(const EqfLevel&) const = default;

private:
    int value_;
};

struct DomainCompetence {
    std::string concept_id;
    std::string context;
    EqfLevel level{1};
    bool operator==(const DomainCompetence&) const = default;
};

// Ability to learn with a tool by applying a technique. Carries a level so
// gap arithmetic is uniform across kinds; 1 means "can use".
struct ToolCompetence {
    std::string tool;
    std::string technique;
    EqfLevel level{1};
    bool operator==(const ToolCompetence&) const = default;
};

struct SrlCompetence {
    std::string strategy;
    EqfLevel level{1};
    bool operator==(const SrlCompetence&) const = default;
};

using Competence = std::variant<DomainCompetence, ToolCompetence, SrlCompetence>;

enum class CompetenceKind { domain, tool, srl };

std::string_view to_string(CompetenceKind k);

// Set-membership key: variant plus ids, level ignored.
struct CompetenceKey {
    CompetenceKind kind{};
    std::string first;
    std::string second;
    auto operator<=>(const CompetenceKey&) const = default;
};

CompetenceKey key_of(const Competence& c);
int level_of(const Competence& c);
Competence with_level(const Competence& c, EqfLevel level);

nlohmann::json to_json(const Competence& c);
Competence competence_from_json(const nlohmann::json& j);

class Catalog {
public:
    Catalog();
    Catalog(Catalog&&) noexcept;
    Catalog& operator=(Catalog&&) noexcept;
    ~Catalog();

    // Parses and validates; throws Error(parse_error) or ValidationError.
    static Catalog from_json(const nlohmann::json& doc);

    int version() const noexcept { return version_; }

    const std::vector<Strategy>& strategies() const noexcept { return strategies_; }
    const std::vector<Technique>& techniques() const noexcept { return techniques_; }
    const std::vector<Category>& categories() const noexcept { return categories_; }
    const std::vector<Vocabulary>& vocabularies() const noexcept { return vocabularies_; }
    const std::vector<WidgetBundle>& bundles() const noexcept { return bundles_; }
    const std::vector<Template>& templates() const noexcept { return templates_; }

    // Snapshot of all widgets with current paradata, ordered by id.
    std::vector<WidgetDescriptor> widgets() const;

    const Strategy* find_strategy(std::string_view id) const;
    const Technique* find_technique(std::string_view id) const;
    const Category* find_category(std::string_view id) const;
    const Template* find_template(std::string_view id) const;
    std::optional<WidgetDescriptor> find_widget(std::string_view id) const;
    bool has_widget(std::string_view id) const;

    std::vector<const Strategy*> strategies_in(Phase p) const;

    // Techniques whose strategy is `strategy`, ordered by id.
    std::vector<Technique> techniques_for(std::string_view strategy) const;

    // Widgets reachable from a phase, strategy or technique id through
    // technique links, de-duplicated and ordered by id.
    std::vector<WidgetDescriptor> widgets_for(std::string_view entity) const;
    std::vector<WidgetDescriptor> widgets_for(Phase p) const;

    // Phases a widget supports through its techniques.
    std::vector<Phase> phases_of_widget(std::string_view widget) const;

    std::vector<WidgetDescriptor> search_widgets(std::string_view query,
                                                 std::optional<std::string_view> category = {}) const;

    std::uint64_t record_widget_added(std::string_view widget);
    std::uint64_t add_count(std::string_view widget) const;

    // Throws Error(unknown_catalog_reference) if any id in `c` does not resolve.
    void check(const Competence& c) const;

    nlohmann::json paradata_json() const;
    void save_paradata(const std::filesystem::path& path) const;
    void load_paradata(const std::filesystem::path& path);

private:
    struct Paradata;

    std::vector<WidgetDescriptor> collect(const std::vector<std::string>& techniques) const;
    std::size_t widget_index(std::string_view id) const;

    int version_ = 1;
    std::vector<Strategy> strategies_;
    std::vector<Technique> techniques_;
    std::vector<Category> categories_;
    std::vector<Vocabulary> vocabularies_;
    std::vector<WidgetDescriptor> widgets_;  // add_count lives in paradata_
    std::vector<WidgetBundle> bundles_;
    std::vector<Template> templates_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> widgets_by_technique_;
    std::unique_ptr<Paradata> paradata_;
};

Catalog load_catalog(const std::filesystem::path& path);

}  // namespace role
