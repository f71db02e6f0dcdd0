#include "role/analytics/operations.hpp"

#include <algorithm>

#include "role/space_service.hpp"

namespace role::analytics {

namespace {

std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    while (!path.empty()) {
        if (path.front() == '/') {
            path.remove_prefix(1);
            continue;
        }
        const auto slash = path.find('/');
        out.push_back(path.substr(0, slash));
        if (slash == std::string_view::npos) break;
        path.remove_prefix(slash);
    }
    return out;
}

}  // namespace

std::string_view to_string(OpKind k) {
    switch (k) {
        case OpKind::space_create: return "space.create";
        case OpKind::space_join: return "space.join";
        case OpKind::space_leave: return "space.leave";
        case OpKind::space_load: return "space.load";
        case OpKind::widget_add: return "widget.add";
        case OpKind::widget_remove: return "widget.remove";
        case OpKind::widget_load: return "widget.load";
    }
    return "?";
}

bool is_api_path(std::string_view path) { return path == "/api" || path.starts_with("/api/"); }

std::optional<Operation> classify_request(const AccessLogEntry& e) {
    if (e.status >= 400) return std::nullopt;
    const auto seg = segments(e.path());
    if (seg.size() < 2 || seg[0] != "api" || seg[1] != "spaces") return std::nullopt;

    Operation op;
    op.actor = e.ip;
    op.ts = e.ts;
    const auto widget_param = e.query_param("widget");
    if (widget_param) op.widget = *widget_param;

    if (seg.size() == 2) {
        if (e.method != "POST") return std::nullopt;
        const auto name = e.query_param("name");
        if (!name) return std::nullopt;
        op.kind = OpKind::space_create;
        op.space = *name;
    } else {
        op.space = url_decode(seg[2]);
        if (seg.size() == 3 && e.method == "GET") {
            op.kind = OpKind::space_load;
        } else if (seg.size() == 4 && seg[3] == "members" && e.method == "POST") {
            op.kind = OpKind::space_join;
        } else if (seg.size() == 4 && seg[3] == "members" && e.method == "DELETE") {
            op.kind = OpKind::space_leave;
        } else if (seg.size() == 4 && seg[3] == "widgets" && e.method == "POST") {
            if (op.widget.empty()) return std::nullopt;
            op.kind = OpKind::widget_add;
        } else if (seg.size() == 5 && seg[3] == "widgets" && e.method == "DELETE") {
            op.kind = OpKind::widget_remove;
        } else if (seg.size() == 5 && seg[3] == "widgets" && e.method == "GET") {
            op.kind = OpKind::widget_load;
        } else {
            return std::nullopt;
        }
    }
    if (!is_valid_space_name(op.space)) return std::nullopt;
    return op;
}

ExtractResult extract_operations(const std::vector<AccessLogEntry>& cleaned) {
    ExtractResult r;
    for (const auto& e : cleaned) {
        if (!is_api_path(e.path())) continue;
        ++r.api_requests;
        if (auto op = classify_request(e))
            r.ops.push_back(std::move(*op));
        else
            ++r.unclassified;
    }
    return r;
}

std::map<std::string, SpaceLabel> classify_spaces(const std::vector<Operation>& ops,
                                                  const std::set<std::string, std::less<>>& srl_widgets,
                                                  ActiveRule rule) {
    struct Acc {
        SpaceLabel label;
        Timestamp first = 0, last = 0;
        bool seen = false, srl_added = false, srl_loaded = false;
        std::set<std::int64_t> days;
    };
    std::map<std::string, Acc> acc;
    for (const auto& op : ops) {
        auto& a = acc[op.space];
        if (!a.seen) {
            a.first = a.last = op.ts;
            a.seen = true;
        }
        a.first = std::min(a.first, op.ts);
        a.last = std::max(a.last, op.ts);
        const bool srl = !op.widget.empty() && srl_widgets.contains(op.widget);
        switch (op.kind) {
            case OpKind::space_create: a.label.created = true; break;
            case OpKind::space_load:
                ++a.label.loads;
                a.days.insert(day_number(op.ts));
                break;
            case OpKind::widget_add: a.srl_added |= srl; break;
            case OpKind::widget_load: a.srl_loaded |= srl; break;
            default: break;
        }
    }
    std::map<std::string, SpaceLabel> out;
    for (auto& [name, a] : acc) {
        a.label.load_days = a.days.size();
        a.label.active = a.label.loads >= static_cast<std::uint64_t>(std::max(rule.min_loads, 0)) &&
                         a.label.load_days >= static_cast<std::uint64_t>(std::max(rule.min_days, 0));
        a.label.srl_enabled = a.srl_added && a.srl_loaded;
        a.label.lifetime_days = day_number(a.last) - day_number(a.first);
        out.emplace(name, a.label);
    }
    return out;
}

std::vector<std::string> distribution_labels() {
    std::vector<std::string> out{std::string(no_category)};
    for (auto l : category_labels) out.emplace_back(l);
    return out;
}

std::optional<Rational> Distribution::fraction(std::string_view label) const {
    if (adds == 0) return std::nullopt;
    auto it = weight.find(std::string(label));
    const Rational w = it == weight.end() ? Rational{} : it->second;
    return w / Rational(static_cast<std::int64_t>(adds));
}

std::optional<std::vector<std::int64_t>> rounded_tenths(const Distribution& d) {
    if (d.adds == 0) return std::nullopt;
    const auto labels = distribution_labels();
    std::vector<std::int64_t> floors;
    std::vector<Rational> remainders;
    std::int64_t total = 0;
    for (const auto& l : labels) {
        const Rational f = *d.fraction(l);
        // f * 1000 split into integer and fractional parts
        const __int128 scaled = static_cast<__int128>(f.num()) * 1000;
        const auto whole = static_cast<std::int64_t>(scaled / f.den());
        floors.push_back(whole);
        remainders.emplace_back(static_cast<std::int64_t>(scaled % f.den()), f.den());
        total += whole;
    }
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; total < 1000 && k < order.size(); ++k, ++total) ++floors[order[k]];
    return floors;
}

CategoryDistributions category_distribution(const std::vector<Operation>& ops,
                                            const std::map<std::string, SpaceLabel>& labels, const Catalog& catalog) {
    CategoryDistributions out;
    std::map<std::string, std::vector<std::string>, std::less<>> categories_of;
    for (const auto& w : catalog.widgets()) categories_of.emplace(w.id, w.categories);

    for (const auto& op : ops) {
        if (op.kind != OpKind::widget_add) continue;
        auto it = labels.find(op.space);
        const bool srl = it != labels.end() && it->second.srl_enabled;
        auto& cohort = srl ? out.srl : out.non_srl;
        auto cats_it = categories_of.find(op.widget);
        const std::vector<std::string> none{std::string(no_category)};
        const auto& cats = cats_it == categories_of.end() || cats_it->second.empty() ? none : cats_it->second;
        const Rational share(1, static_cast<std::int64_t>(cats.size()));
        for (auto* d : {&cohort, &out.all}) {
            ++d->adds;
            for (const auto& c : cats) d->weight[c] += share;
        }
    }
    return out;
}

}  // namespace role::analytics
