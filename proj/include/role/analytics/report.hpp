#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "role/analytics/kernels.hpp"
#include "role/catalog.hpp"

namespace role::analytics {

struct RunConfig {
    std::filesystem::path log;
    std::optional<std::filesystem::path> bots;
    std::optional<std::filesystem::path> partners;
    std::optional<std::filesystem::path> geo;
    std::optional<std::filesystem::path> srl_widgets;  // default: catalog srl flags
    std::filesystem::path catalog;
    ActiveRule rule;
    ExecutionPolicy execution;
};

// Everything the pipeline needs, already loaded.
struct PipelineInputs {
    const Catalog* catalog = nullptr;
    Filters filters;
    GeoTable geo;
    std::set<std::string, std::less<>> srl_widgets;
    ActiveRule rule;
};

struct Totals {
    std::uint64_t raw_lines = 0;
    std::uint64_t malformed = 0;
    std::uint64_t parsed = 0;
    std::uint64_t removed_bots = 0;
    std::uint64_t removed_partners = 0;
    std::uint64_t removed_static = 0;
    std::uint64_t cleaned = 0;
    std::uint64_t api_requests = 0;
    std::uint64_t classified = 0;
    std::uint64_t unclassified = 0;
    std::uint64_t distinct_ips = 0;
    std::uint64_t distinct_cities = 0;
    std::uint64_t distinct_countries = 0;
};

struct DailyRow {
    std::string day;
    std::uint64_t requests = 0;
    std::uint64_t cumulative = 0;
    std::uint64_t bytes = 0;
    std::uint64_t distinct_ips = 0;
};

struct SpaceStats {
    std::uint64_t seen = 0;
    std::uint64_t created = 0;
    std::uint64_t active = 0;
    std::uint64_t srl_enabled = 0;
    std::uint64_t srl_active = 0;
    std::optional<Rational> mean_srl_lifetime_days;
};

struct UserCohorts {
    std::uint64_t active_users = 0;
    std::uint64_t creators = 0;
    std::uint64_t joiners = 0;
    std::uint64_t widget_adders = 0;
    std::uint64_t re_openers = 0;
};

struct WidgetRow {
    std::string widget;
    std::uint64_t adds = 0;
    std::uint64_t loads = 0;
};

struct GeoRow {
    std::string city;  // empty for country rows
    std::string country;
    std::uint64_t requests = 0;
    std::uint64_t distinct_ips = 0;
};

struct UsageReport {
    ActiveRule rule;
    Totals totals;
    std::vector<DailyRow> daily;
    std::map<std::string, std::uint64_t> operations;  // op name -> count
    SpaceStats spaces;
    UserCohorts users;
    CategoryDistributions categories;
    std::vector<WidgetRow> widgets;
    std::vector<GeoRow> cities;
    std::vector<GeoRow> countries;
};

UsageReport analyze(const LogInput& input, const PipelineInputs& inputs, ExecutionPolicy execution = {});

// Loads every input named by `config` and analyzes the log.
UsageReport run(const RunConfig& config);

std::set<std::string, std::less<>> load_widget_list(const std::filesystem::path& path);
std::set<std::string, std::less<>> srl_widgets_of(const Catalog& catalog);

nlohmann::ordered_json to_json(const UsageReport& r);
std::string to_csv(const UsageReport& r);

// Writes JSON or CSV depending on the extension of `path`.
void write_report(const UsageReport& r, const std::filesystem::path& path);

}  // namespace role::analytics
