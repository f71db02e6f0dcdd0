#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "role/analytics/access_log.hpp"
#include "role/analytics/rational.hpp"
#include "role/catalog.hpp"

namespace role::analytics {

enum class OpKind : std::uint8_t { space_create, space_join, space_leave, space_load, widget_add, widget_remove, widget_load };

inline constexpr std::array<OpKind, 7> all_op_kinds{OpKind::space_create, OpKind::space_join,    OpKind::space_leave,
                                                    OpKind::space_load,   OpKind::widget_add,    OpKind::widget_remove,
                                                    OpKind::widget_load};

std::string_view to_string(OpKind k);

struct Operation {
    OpKind kind{};
    std::string actor;
    std::string space;
    std::string widget;  // empty when the route carries none
    Timestamp ts = 0;
    bool operator==(const Operation&) const = default;
};

bool is_api_path(std::string_view path);

// Maps an API request to an operation; nullopt means unclassified
// (unknown route, failed request, or missing parameters).
std::optional<Operation> classify_request(const AccessLogEntry& e);

struct ExtractResult {
    std::vector<Operation> ops;
    std::uint64_t api_requests = 0;
    std::uint64_t unclassified = 0;
};

// Operations of the API entries among `cleaned`, in input order.
ExtractResult extract_operations(const std::vector<AccessLogEntry>& cleaned);

struct ActiveRule {
    int min_loads = 5;
    int min_days = 2;
};

struct SpaceLabel {
    bool created = false;
    bool active = false;
    bool srl_enabled = false;
    std::int64_t lifetime_days = 0;
    std::uint64_t loads = 0;
    std::uint64_t load_days = 0;
};

std::map<std::string, SpaceLabel> classify_spaces(const std::vector<Operation>& ops,
                                                  const std::set<std::string, std::less<>>& srl_widgets,
                                                  ActiveRule rule = {});

inline constexpr std::string_view no_category = "no specific category";

// Bucket labels: no_category first, then the store categories.
std::vector<std::string> distribution_labels();

struct Distribution {
    std::uint64_t adds = 0;
    std::map<std::string, Rational> weight;  // per label, sums to `adds`

    std::optional<Rational> fraction(std::string_view label) const;
};

// Largest-remainder rounding of a distribution to tenths of a percent in
// distribution_labels() order; sums to 1000 unless the distribution is empty.
std::optional<std::vector<std::int64_t>> rounded_tenths(const Distribution& d);

struct CategoryDistributions {
    Distribution srl;
    Distribution non_srl;
    Distribution all;
};

CategoryDistributions category_distribution(const std::vector<Operation>& ops,
                                            const std::map<std::string, SpaceLabel>& labels, const Catalog& catalog);

}  // namespace role::analytics
