#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "role/space_service.hpp"
#include "workloads.hpp"

using namespace role;
using role::testing::error_of;

namespace {

constexpr Timestamp day_ms = 86'400'000;

struct Env {
    Catalog catalog = role::testing::default_catalog();
    EventLog log;
    ManualClock clock{1'325'376'000'000};
    SpaceService spaces{catalog, log, clock.as_clock()};
};

}  // namespace

TEST_CASE("create_space") {
    Env env;
    const auto s = env.spaces.create_space("quadratic-functions", "dominik");
    CHECK(s.owner == "dominik");
    CHECK(s.members == std::vector<std::string>{"dominik"});
    REQUIRE(s.activities.size() == 1);
    CHECK(s.activities[0].name == "Start");
    CHECK(env.log.snapshot().back().verb == Verb::space_create);

    CHECK(error_of([&] { env.spaces.create_space("quadratic-functions", "ana"); }) == ErrorCode::name_taken);
    CHECK(error_of([&] { env.spaces.create_space("a/b", "ana"); }) == ErrorCode::invalid_name);
    CHECK(error_of([&] { env.spaces.create_space("", "ana"); }) == ErrorCode::invalid_name);
    CHECK(error_of([&] { env.spaces.create_space("study group", "ana"); }) == ErrorCode::invalid_name);
    CHECK(env.log.size() == 1);
}

TEST_CASE("join and leave") {
    Env env;
    env.spaces.create_space("algebra", "dominik");

    auto s = env.spaces.join_space("algebra", "ana");
    CHECK(s.members.size() == 2);
    CHECK(s.owner == "dominik");

    SUBCASE("owner leaving hands ownership to the longest-standing member") {
        env.spaces.join_space("algebra", "ben");
        s = env.spaces.leave_space("algebra", "dominik");
        CHECK(s.owner == "ana");
        CHECK(s.members == std::vector<std::string>{"ana", "ben"});
    }
    SUBCASE("owner leaves a two-member space") {
        s = env.spaces.leave_space("algebra", "dominik");
        CHECK(s.owner == "ana");
        CHECK(s.members.size() == 1);
    }
    SUBCASE("non-member cannot leave") {
        CHECK(error_of([&] { env.spaces.leave_space("algebra", "zoe"); }) == ErrorCode::not_a_member);
    }
    SUBCASE("the last member cannot leave") {
        env.spaces.leave_space("algebra", "ana");
        CHECK(error_of([&] { env.spaces.leave_space("algebra", "dominik"); }) == ErrorCode::last_member);
    }
    SUBCASE("joining twice is a no-op") {
        const auto before = env.log.size();
        env.spaces.join_space("algebra", "ana");
        CHECK(env.log.size() == before);
    }
    SUBCASE("unknown space") {
        CHECK(error_of([&] { env.spaces.join_space("nowhere", "ana"); }) == ErrorCode::unknown_space);
    }
}

TEST_CASE("add_widget") {
    Env env;
    env.spaces.create_space("quadratic-functions", "dominik");

    const auto w = env.spaces.add_widget("quadratic-functions", "Start", "to_learn_list", "dominik");
    CHECK(w.widget_id == "to_learn_list");
    CHECK(env.catalog.add_count("to_learn_list") == 1);
    CHECK(env.spaces.get("quadratic-functions").find_instance(w.instance_id) != nullptr);

    const auto w2 = env.spaces.add_widget("quadratic-functions", "Start", "to_learn_list", "dominik");
    CHECK(w2.instance_id != w.instance_id);
    CHECK(env.spaces.get("quadratic-functions").widget_count() == 2);

    CHECK(error_of([&] { env.spaces.add_widget("quadratic-functions", "Start", "quiz", "eve"); }) ==
          ErrorCode::not_a_member);
    CHECK(error_of([&] { env.spaces.add_widget("quadratic-functions", "Start", "nope", "dominik"); }) ==
          ErrorCode::unknown_widget);
    CHECK(env.catalog.add_count("quiz") == 0);
}

TEST_CASE("default placement is the first free row-major slot") {
    Env env;
    env.spaces.create_space("grid", "ana");
    std::vector<Layout> got;
    for (int i = 0; i < 7; ++i) got.push_back(env.spaces.add_widget("grid", "Start", "wiki", "ana").layout);
    for (int i = 0; i < 6; ++i) CHECK(got[i] == Layout{2 * i, 0, 2, 2});
    CHECK(got[6] == Layout{0, 2, 2, 2});

    env.spaces.add_widget("grid", "Other", "wiki", "ana");
    const auto s = env.spaces.get("grid");
    REQUIRE(s.activities.size() == 2);
    CHECK(s.activities[1].name == "Other");
    CHECK(s.activities[1].widgets[0].layout == Layout{0, 0, 2, 2});
}

TEST_CASE("load_space counts loads and distinct days") {
    Env env;
    env.spaces.create_space("algebra", "ana");
    const auto view = env.spaces.load_space("algebra", "ana");
    CHECK(view["load_count"] == 1);
    CHECK(view["load_days"].size() == 1);

    for (int i = 0; i < 2; ++i) {
        env.clock.advance(3'600'000);
        env.spaces.load_space("algebra", "ana");
    }
    env.clock.advance(day_ms);
    for (int i = 0; i < 2; ++i) env.spaces.load_space("algebra", "ben");
    const auto s = env.spaces.get("algebra");
    CHECK(s.load_count == 5);
    CHECK(s.load_days.size() == 2);
    CHECK(error_of([&] { env.spaces.load_space("nowhere", "ana"); }) == ErrorCode::unknown_space);
}

TEST_CASE("layout") {
    Env env;
    env.spaces.create_space("algebra", "ana");
    const auto w = env.spaces.add_widget("algebra", "Start", "function_plotter", "ana");
    CHECK(w.layout.width == 2);
    CHECK(w.layout.height == 2);

    env.spaces.set_layout("algebra", w.instance_id, {0, 0, 4, 3}, "ana");
    const auto first = env.spaces.load_space("algebra", "ana");
    const auto second = env.spaces.load_space("algebra", "ana");
    CHECK(first["activities"] == second["activities"]);
    CHECK(first["activities"][0]["widgets"][0]["layout"] ==
          nlohmann::ordered_json({{"x", 0}, {"y", 0}, {"width", 4}, {"height", 3}}));

    CHECK(error_of([&] { env.spaces.set_layout("algebra", "i42", {0, 0, 2, 2}, "ana"); }) ==
          ErrorCode::unknown_instance);
    CHECK(error_of([&] { env.spaces.set_layout("algebra", w.instance_id, {0, 0, 0, 2}, "ana"); }) ==
          ErrorCode::validation_error);
    CHECK(error_of([&] { env.spaces.set_layout("algebra", w.instance_id, {0, 0, 2, 2}, "eve"); }) ==
          ErrorCode::not_a_member);
}

TEST_CASE("layout write/read loop") {
    Env env;
    env.spaces.create_space("algebra", "ana");
    const auto w = env.spaces.add_widget("algebra", "Start", "quiz", "ana");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        Layout l{static_cast<int>(rng() % 10), static_cast<int>(rng() % 30), 1 + static_cast<int>(rng() % 6),
                 1 + static_cast<int>(rng() % 6)};
        env.spaces.set_layout("algebra", w.instance_id, l, "ana");
        CHECK(env.spaces.get("algebra").find_instance(w.instance_id)->layout == l);
    }
}

TEST_CASE("share_url") {
    Env env;
    env.spaces.create_space("quadratic-functions", "dominik");
    CHECK(env.spaces.share_url("quadratic-functions") == "/spaces/quadratic-functions");
    CHECK(env.spaces.share_url("quadratic-functions") == env.spaces.share_url("quadratic-functions"));
    CHECK(error_of([&] { env.spaces.share_url("nowhere"); }) == ErrorCode::unknown_space);
}

TEST_CASE("shared store") {
    Env env;
    env.spaces.create_space("algebra", "ana");
    env.spaces.put_shared("algebra", "canvas", {{"strokes", 3}}, "ana");
    CHECK(env.spaces.get("algebra").shared_store.at("canvas")["strokes"] == 3);
    CHECK(error_of([&] { env.spaces.put_shared("algebra", "canvas", 1, "eve"); }) == ErrorCode::not_a_member);
}

TEST_CASE("random operations keep the owner a member and replay to the same state") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Env env;
        std::mt19937_64 rng(seed);
        std::size_t events_before = 0;
        role::testing::random_space_ops(env.spaces, env.catalog, rng, 300, env.clock, [&] {
            for (const auto& [name, s] : env.spaces.snapshot()) {
                CHECK(s.is_member(s.owner));
                CHECK_FALSE(s.activities.empty());
            }
            const auto n = env.log.size();
            CHECK(n - events_before <= 1);
            events_before = n;
        });
        CHECK(replay_spaces(env.log.snapshot()) == env.spaces.snapshot());

        std::map<std::string, std::uint64_t> adds;
        for (const auto& e : env.log.snapshot())
            if (e.verb == Verb::widget_add) ++adds[e.object_id];
        for (const auto& w : env.catalog.widgets()) CHECK(w.add_count == adds[w.id]);

        SpaceService restored(env.catalog, env.log);
        restored.restore(env.log.snapshot());
        CHECK(restored.snapshot() == env.spaces.snapshot());
    }
}

TEST_CASE("space names") {
    CHECK(is_valid_space_name("quadratic-functions"));
    CHECK(is_valid_space_name("A_b.c~1"));
    CHECK_FALSE(is_valid_space_name("a/b"));
    CHECK_FALSE(is_valid_space_name("a b"));
    CHECK_FALSE(is_valid_space_name(std::string(65, 'a')));
}
