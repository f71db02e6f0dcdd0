#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "role/catalog.hpp"

using namespace role;
using role::testing::error_of;

namespace {

std::vector<std::string> ids(const std::vector<WidgetDescriptor>& ws) {
    std::vector<std::string> out;
    for (const auto& w : ws) out.push_back(w.id);
    return out;
}

std::vector<std::string> problems_of(const nlohmann::json& doc) {
    try {
        Catalog::from_json(doc);
    } catch (const ValidationError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("default catalog has 4 phases, 9 strategies in 3 groups of 3, 7 categories") {
    const auto cat = role::testing::default_catalog();
    CHECK(all_phases.size() == 4);
    CHECK(cat.strategies().size() == 9);
    CHECK(cat.techniques().size() == 31);

    std::map<StrategyGroup, std::set<std::string>> groups;
    for (const auto& s : cat.strategies()) groups[s.group].insert(s.id);
    CHECK(groups[StrategyGroup::cognitive] == std::set<std::string>{"organisation", "elaboration", "rehearsal"});
    CHECK(groups[StrategyGroup::meta_cognitive] ==
          std::set<std::string>{"goal_setting", "self_monitoring", "regulation"});
    CHECK(groups[StrategyGroup::resource_management] ==
          std::set<std::string>{"time_management", "help_seeking", "environment_preparation"});

    REQUIRE(cat.categories().size() == 7);
    for (const auto& label : category_labels) {
        const auto* c = cat.find_category(label);
        REQUIRE(c != nullptr);
        CHECK_FALSE(c->phases.empty());
    }
}

TEST_CASE("default strategy and category phase mapping") {
    const auto cat = role::testing::default_catalog();
    CHECK(cat.find_strategy("goal_setting")->phase == Phase::plan);
    CHECK(cat.find_strategy("help_seeking")->phase == Phase::prepare);
    CHECK(cat.find_strategy("environment_preparation")->phase == Phase::prepare);
    for (const auto* id : {"organisation", "elaboration", "rehearsal", "time_management"})
        CHECK(cat.find_strategy(id)->phase == Phase::learn);
    CHECK(cat.find_strategy("self_monitoring")->phase == Phase::reflect);
    CHECK(cat.find_strategy("regulation")->phase == Phase::reflect);

    CHECK(cat.find_category("Plan & Organize")->phases == std::vector<Phase>{Phase::plan});
    CHECK(cat.find_category("Search & Get Recommendation")->phases == std::vector<Phase>{Phase::prepare});
    CHECK(cat.find_category("Reflect & Evaluate")->phases == std::vector<Phase>{Phase::reflect});
}

TEST_CASE("every reference in the default catalog resolves") {
    const auto cat = role::testing::default_catalog();
    for (const auto& t : cat.techniques()) CHECK(cat.find_strategy(t.strategy) != nullptr);
    for (const auto& w : cat.widgets()) {
        for (const auto& t : w.techniques) CHECK(cat.find_technique(t) != nullptr);
        for (const auto& c : w.categories) CHECK(cat.find_category(c) != nullptr);
    }
    for (const auto& b : cat.bundles()) {
        CHECK_FALSE(b.widgets.empty());
        for (const auto& w : b.widgets) CHECK(cat.has_widget(w));
    }
    for (const auto& t : cat.templates())
        for (const auto& e : t.entities)
            CHECK((parse_phase(e) || cat.find_strategy(e) || cat.find_technique(e)));
}

TEST_CASE("phase order is fixed and cycles") {
    CHECK(to_string(Phase::plan) == "plan");
    CHECK(next_phase(Phase::plan) == Phase::prepare);
    CHECK(next_phase(Phase::prepare) == Phase::learn);
    CHECK(next_phase(Phase::learn) == Phase::reflect);
    CHECK(next_phase(Phase::reflect) == Phase::plan);
    CHECK_FALSE(parse_phase("review").has_value());
}

TEST_CASE("techniques_for") {
    const auto cat = role::testing::default_catalog();

    SUBCASE("elaboration includes note taking and brainstorming") {
        std::set<std::string> got;
        for (const auto& t : cat.techniques_for("elaboration")) got.insert(t.id);
        CHECK(got.count("note_taking"));
        CHECK(got.count("brainstorming"));
        CHECK(got.count("collaborative_learning"));
    }
    SUBCASE("ordered by id and only the strategy's own") {
        const auto ts = cat.techniques_for("rehearsal");
        CHECK(std::is_sorted(ts.begin(), ts.end(), [](auto& a, auto& b) { return a.id < b.id; }));
        for (const auto& t : ts) CHECK(t.strategy == "rehearsal");
    }
    SUBCASE("strategy without techniques gives an empty list") {
        auto doc = role::testing::default_catalog_doc();
        doc["strategies"].push_back(
            {{"id", "cramming"}, {"name", "Cramming"}, {"group", "cognitive"}, {"phase", "learn"}});
        const auto c = Catalog::from_json(doc);
        CHECK(c.techniques_for("cramming").empty());
    }
    SUBCASE("unknown strategy") {
        CHECK(error_of([&] { cat.techniques_for("daydreaming"); }) == ErrorCode::unknown_strategy);
    }
}

TEST_CASE("widgets_for follows technique links") {
    const auto cat = role::testing::default_catalog();

    CHECK(ids(cat.widgets_for("todo_listing")) == std::vector<std::string>{"to_learn_list"});
    CHECK(ids(cat.widgets_for("scheduling")) == std::vector<std::string>{"time_planner"});

    const auto organisation = ids(cat.widgets_for("organisation"));
    CHECK(organisation == role::testing::widgets_reachable(role::testing::default_catalog_doc(), "organisation"));
    CHECK(std::is_sorted(organisation.begin(), organisation.end()));

    const auto plan = ids(cat.widgets_for(Phase::plan));
    CHECK(plan == ids(cat.widgets_for("plan")));
    CHECK(plan == ids(cat.widgets_for("goal_setting")));

    CHECK(error_of([&] { cat.widgets_for("nothing_here"); }) == ErrorCode::unknown_entity);
}

TEST_CASE("widgets_for of a phase without linked widgets is empty") {
    nlohmann::json doc = role::testing::default_catalog_doc();
    for (auto& s : doc["strategies"])
        if (s["phase"] == "reflect") s["phase"] = "learn";
    const auto cat = Catalog::from_json(doc);
    CHECK(cat.widgets_for(Phase::reflect).empty());
}

TEST_CASE("widgets_for(strategy) equals the union over its techniques on random catalogs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const auto doc = role::testing::random_catalog(rng);
        const auto cat = Catalog::from_json(doc);
        for (const auto& s : cat.strategies()) {
            std::set<std::string> via_techniques;
            for (const auto& t : cat.techniques_for(s.id))
                for (const auto& w : cat.widgets_for(t.id)) via_techniques.insert(w.id);
            const auto direct = ids(cat.widgets_for(s.id));
            CHECK(std::set<std::string>(direct.begin(), direct.end()) == via_techniques);
            CHECK(direct == role::testing::widgets_reachable(doc, s.id));
        }
        for (auto p : all_phases)
            CHECK(ids(cat.widgets_for(p)) == role::testing::widgets_reachable(doc, std::string(to_string(p))));
    }
}

TEST_CASE("search_widgets") {
    auto cat = role::testing::default_catalog();

    SUBCASE("'to do' finds the To-Learn-List first") {
        const auto hits = cat.search_widgets("to do");
        REQUIRE_FALSE(hits.empty());
        CHECK(hits.front().id == "to_learn_list");
    }
    SUBCASE("case-insensitive") {
        CHECK(ids(cat.search_widgets("TO DO")) == ids(cat.search_widgets("to do")));
    }
    SUBCASE("empty query returns every widget ranked by paradata") {
        cat.record_widget_added("wiki");
        cat.record_widget_added("wiki");
        cat.record_widget_added("quiz");
        const auto all = cat.search_widgets("");
        CHECK(all.size() == cat.widgets().size());
        CHECK(all[0].id == "wiki");
        CHECK(all[1].id == "quiz");
    }
    SUBCASE("ranking is a total order consistent over all pairs") {
        cat.record_widget_added("mind_map");
        cat.record_widget_added("binocs");
        const auto all = cat.search_widgets("");
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                const auto& a = all[i];
                const auto& b = all[j];
                CHECK((a.add_count > b.add_count || (a.add_count == b.add_count && a.id < b.id)));
            }
        CHECK(ids(cat.search_widgets("")) == ids(all));
    }
    SUBCASE("category filter") {
        const auto hits = cat.search_widgets("", std::string_view("Train & Test"));
        CHECK(ids(hits) == std::vector<std::string>{"function_plotter", "quiz", "vocabulary_trainer"});
    }
    SUBCASE("no match") { CHECK(cat.search_widgets("zzzz-not-there").empty()); }
}

TEST_CASE("record_widget_added increments by one") {
    auto doc = role::testing::default_catalog_doc();
    for (auto& w : doc["widgets"])
        if (w["id"] == "quiz") w["add_count"] = 41;
    auto cat = Catalog::from_json(doc);
    CHECK(cat.record_widget_added("wiki") == 1);
    CHECK(cat.record_widget_added("quiz") == 42);
    CHECK(cat.add_count("quiz") == 42);
    CHECK(error_of([&] { cat.record_widget_added("nope"); }) == ErrorCode::unknown_widget);
}

TEST_CASE("paradata survives a save and load") {
    role::testing::TempDir dir;
    auto cat = role::testing::default_catalog();
    cat.record_widget_added("wiki");
    cat.record_widget_added("wiki");
    cat.save_paradata(dir / "paradata.json");

    auto fresh = role::testing::default_catalog();
    fresh.load_paradata(dir / "paradata.json");
    CHECK(fresh.add_count("wiki") == 2);
    CHECK(fresh.add_count("quiz") == 0);
}

TEST_CASE("validation reports dangling references") {
    SUBCASE("technique pointing at an unknown strategy names the technique") {
        auto doc = role::testing::default_catalog_doc();
        doc["techniques"].push_back({{"id", "speed_reading"}, {"name", "Speed reading"}, {"strategy", "skimming"}});
        const auto problems = problems_of(doc);
        CHECK(mentions(problems, "speed_reading"));
    }
    SUBCASE("missing phase") {
        auto doc = role::testing::default_catalog_doc();
        doc["phases"] = {"plan", "prepare", "learn"};
        CHECK(mentions(problems_of(doc), "phase set must be exactly 4"));
    }
    SUBCASE("every problem is listed, not just the first") {
        auto doc = role::testing::default_catalog_doc();
        doc["widgets"][0]["techniques"].push_back("ghost_technique");
        doc["bundles"][0]["widgets"].push_back("ghost_widget");
        doc["widgets"][1]["categories"].push_back("Play & Win");
        const auto problems = problems_of(doc);
        CHECK(problems.size() >= 3);
        CHECK(mentions(problems, "ghost_technique"));
        CHECK(mentions(problems, "ghost_widget"));
        CHECK(mentions(problems, "Play & Win"));
    }
    SUBCASE("category outside the seven labels") {
        auto doc = role::testing::default_catalog_doc();
        doc["categories"].push_back({{"id", "Play & Win"}, {"phases", {"learn"}}});
        CHECK(mentions(problems_of(doc), "Play & Win"));
    }
    SUBCASE("category without phases") {
        auto doc = role::testing::default_catalog_doc();
        doc["categories"][0]["phases"] = nlohmann::json::array();
        CHECK_FALSE(problems_of(doc).empty());
    }
    SUBCASE("malformed documents are parse errors") {
        CHECK(error_of([] { Catalog::from_json(nlohmann::json::array()); }) == ErrorCode::parse_error);
        auto doc = role::testing::default_catalog_doc();
        doc["widgets"] = "many";
        CHECK(error_of([&] { Catalog::from_json(doc); }) == ErrorCode::parse_error);
        CHECK(error_of([] { load_catalog("/nonexistent/catalog.json"); }) == ErrorCode::parse_error);
    }
}

TEST_CASE("EqfLevel range") {
    CHECK(EqfLevel(1).value() == 1);
    CHECK(EqfLevel(8).value() == 8);
    CHECK(error_of([] { EqfLevel(0); }) == ErrorCode::validation_error);
    CHECK(error_of([] { EqfLevel(9); }) == ErrorCode::validation_error);
}

TEST_CASE("competence keys ignore the level") {
    const Competence a = SrlCompetence{"elaboration", EqfLevel(2)};
    const Competence b = SrlCompetence{"elaboration", EqfLevel(5)};
    const Competence c = DomainCompetence{"clovis_i", "history", EqfLevel(2)};
    CHECK(key_of(a) == key_of(b));
    CHECK_FALSE(key_of(a) == key_of(c));
    CHECK(level_of(with_level(a, EqfLevel(7))) == 7);
    CHECK(competence_from_json(to_json(c)) == c);

    const auto cat = role::testing::default_catalog();
    CHECK_NOTHROW(cat.check(c));
    CHECK(error_of([&] { cat.check(DomainCompetence{"pepin", "history", EqfLevel(1)}); }) ==
          ErrorCode::unknown_catalog_reference);
    CHECK(error_of([&] { cat.check(ToolCompetence{"quiz", "juggling", EqfLevel(1)}); }) ==
          ErrorCode::unknown_catalog_reference);
}
