#include "role/analytics/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "role/error.hpp"

namespace role::analytics {

namespace {

nlohmann::ordered_json percent_json(std::optional<std::int64_t> tenths) {
    if (!tenths) return nullptr;
    return static_cast<double>(*tenths) / 10.0;
}

std::string tenths_text(std::optional<std::int64_t> tenths) {
    if (!tenths) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%lld", static_cast<long long>(*tenths / 10),
                  static_cast<long long>(*tenths % 10));
    return buf;
}

std::optional<std::int64_t> mean_tenths(const std::optional<Rational>& r) {
    if (!r) return std::nullopt;
    return tenths_half_up(*r);
}

std::vector<GeoRow> sorted_rows(std::vector<GeoRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const GeoRow& a, const GeoRow& b) {
        if (a.requests != b.requests) return a.requests > b.requests;
        if (a.country != b.country) return a.country < b.country;
        return a.city < b.city;
    });
    return rows;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::set<std::string, std::less<>> load_widget_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config_parse_error, "cannot open " + path.string());
    std::set<std::string, std::less<>> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t\r");
        const auto id = line.substr(b, e - b + 1);
        if (id.find_first_of(" \t,") != std::string::npos)
            throw Error(ErrorCode::config_parse_error,
                        "widget list line " + std::to_string(n) + ": expected one widget id");
        out.insert(id);
    }
    return out;
}

std::set<std::string, std::less<>> srl_widgets_of(const Catalog& catalog) {
    std::set<std::string, std::less<>> out;
    for (const auto& w : catalog.widgets())
        if (w.srl) out.insert(w.id);
    return out;
}

UsageReport analyze(const LogInput& input, const PipelineInputs& inputs, ExecutionPolicy execution) {
    if (!inputs.catalog) throw std::invalid_argument("analyze requires a catalog");
    UsageReport r;
    r.rule = inputs.rule;

    const auto parsed = parse_entries(input, execution);
    auto cleaned = clean(parsed.entries, inputs.filters, execution);
    auto extracted = extract_operations(cleaned.kept, execution);

    auto& t = r.totals;
    t.raw_lines = input.lines.size();
    t.malformed = parsed.malformed;
    t.parsed = parsed.entries.size();
    t.removed_bots = cleaned.bots;
    t.removed_partners = cleaned.partners;
    t.removed_static = cleaned.static_content;
    t.cleaned = cleaned.kept.size();
    t.api_requests = extracted.api_requests;
    t.classified = extracted.ops.size();
    t.unclassified = extracted.unclassified;

    std::set<std::string> ips;
    std::uint64_t cumulative = 0;
    for (auto& [day, s] : daily_stats(cleaned.kept, execution)) {
        cumulative += s.requests;
        r.daily.push_back({day_string(day), s.requests, cumulative, s.bytes, s.ips.size()});
        ips.insert(s.ips.begin(), s.ips.end());
    }
    t.distinct_ips = ips.size();

    const auto geo = geo_summary(cleaned.kept, inputs.geo, execution);
    for (const auto& [key, s] : geo.cities) {
        r.cities.push_back({key.second, key.first, s.requests, s.ips.size()});
        if (GeoRecord{key.second, key.first} != unknown_geo) ++t.distinct_cities;
    }
    for (const auto& [country, s] : geo.countries) {
        r.countries.push_back({"", country, s.requests, s.ips.size()});
        if (country != unknown_geo.country) ++t.distinct_countries;
    }
    r.cities = sorted_rows(std::move(r.cities));
    r.countries = sorted_rows(std::move(r.countries));

    for (auto k : all_op_kinds) r.operations[std::string(to_string(k))] = 0;
    std::map<OpKind, std::set<std::string>> actors_by_kind;
    std::set<std::string> active_users;
    std::map<std::string, WidgetRow> widgets;
    for (const auto& op : extracted.ops) {
        ++r.operations[std::string(to_string(op.kind))];
        actors_by_kind[op.kind].insert(op.actor);
        active_users.insert(op.actor);
        if (op.widget.empty()) continue;
        if (op.kind == OpKind::widget_add) ++widgets[op.widget].adds;
        if (op.kind == OpKind::widget_load) ++widgets[op.widget].loads;
    }
    for (auto& [id, row] : widgets) {
        row.widget = id;
        r.widgets.push_back(row);
    }

    auto& u = r.users;
    u.active_users = active_users.size();
    u.creators = actors_by_kind[OpKind::space_create].size();
    u.joiners = actors_by_kind[OpKind::space_join].size();
    u.widget_adders = actors_by_kind[OpKind::widget_add].size();
    u.re_openers = actors_by_kind[OpKind::space_load].size();

    const auto labels = classify_spaces(extracted.ops, inputs.srl_widgets, inputs.rule);
    auto& sp = r.spaces;
    Rational lifetime_sum;
    for (const auto& [name, l] : labels) {
        ++sp.seen;
        sp.created += l.created;
        sp.active += l.active;
        if (l.srl_enabled) {
            ++sp.srl_enabled;
            sp.srl_active += l.active;
            lifetime_sum += Rational(l.lifetime_days);
        }
    }
    if (sp.srl_enabled) sp.mean_srl_lifetime_days = lifetime_sum / Rational(static_cast<std::int64_t>(sp.srl_enabled));

    r.categories = category_distribution(extracted.ops, labels, *inputs.catalog);
    return r;
}

UsageReport run(const RunConfig& config) {
    const auto catalog = load_catalog(config.catalog);
    PipelineInputs inputs;
    inputs.catalog = &catalog;
    if (config.bots) inputs.filters.bots = BotPatterns::load(*config.bots);
    if (config.partners) inputs.filters.partners = PartnerSet::load(*config.partners);
    if (config.geo) inputs.geo = GeoTable::load(*config.geo);
    inputs.srl_widgets = config.srl_widgets ? load_widget_list(*config.srl_widgets) : srl_widgets_of(catalog);
    inputs.rule = config.rule;

    std::ifstream in(config.log, std::ios::binary);
    if (!in) throw Error(ErrorCode::parse_error, "cannot open log " + config.log.string());
    return analyze(read_log_lines(in), inputs, config.execution);
}

nlohmann::ordered_json to_json(const UsageReport& r) {
    using oj = nlohmann::ordered_json;
    oj out;
    out["parameters"] = {{"active_loads", r.rule.min_loads}, {"active_days", r.rule.min_days}};

    const auto& t = r.totals;
    out["totals"] = {{"raw_lines", t.raw_lines},
                     {"malformed", t.malformed},
                     {"parsed", t.parsed},
                     {"removed_bots", t.removed_bots},
                     {"removed_partners", t.removed_partners},
                     {"removed_static", t.removed_static},
                     {"cleaned", t.cleaned},
                     {"api_requests", t.api_requests},
                     {"classified", t.classified},
                     {"unclassified", t.unclassified},
                     {"distinct_ips", t.distinct_ips},
                     {"distinct_cities", t.distinct_cities},
                     {"distinct_countries", t.distinct_countries}};

    out["daily"] = oj::array();
    for (const auto& d : r.daily)
        out["daily"].push_back({{"day", d.day},
                                {"requests", d.requests},
                                {"cumulative", d.cumulative},
                                {"bytes", d.bytes},
                                {"distinct_ips", d.distinct_ips}});

    oj ops = oj::object();
    for (auto k : all_op_kinds) ops[std::string(to_string(k))] = r.operations.at(std::string(to_string(k)));
    ops["unclassified"] = t.unclassified;
    out["operations"] = ops;

    const auto& s = r.spaces;
    oj lifetime_exact = nullptr;
    if (s.mean_srl_lifetime_days) lifetime_exact = s.mean_srl_lifetime_days->str();
    out["spaces"] = {{"seen", s.seen},
                     {"created", s.created},
                     {"active", s.active},
                     {"active_percent", percent_json(percent_tenths(s.active, s.seen))},
                     {"srl_enabled", s.srl_enabled},
                     {"srl_active", s.srl_active},
                     {"srl_active_percent", percent_json(percent_tenths(s.srl_active, s.srl_enabled))},
                     {"mean_srl_lifetime_days", percent_json(mean_tenths(s.mean_srl_lifetime_days))},
                     {"mean_srl_lifetime_days_exact", lifetime_exact}};

    const auto& u = r.users;
    auto cohort = [&](std::uint64_t n) {
        return oj{{"count", n}, {"percent", percent_json(percent_tenths(n, u.active_users))}};
    };
    out["users"] = {{"active_users", u.active_users},
                    {"creators", cohort(u.creators)},
                    {"joiners", cohort(u.joiners)},
                    {"widget_adders", cohort(u.widget_adders)},
                    {"re_openers", cohort(u.re_openers)}};

    auto distribution = [](const Distribution& d) {
        oj percent = oj::object(), exact = oj::object();
        const auto labels = distribution_labels();
        const auto tenths = rounded_tenths(d);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            percent[labels[i]] = tenths ? oj((*tenths)[i] / 10.0) : oj(nullptr);
            const auto f = d.fraction(labels[i]);
            exact[labels[i]] = f ? oj(f->str()) : oj(nullptr);
        }
        return oj{{"adds", d.adds}, {"percent", percent}, {"exact", exact}};
    };
    out["categories"] = {{"srl", distribution(r.categories.srl)},
                         {"non_srl", distribution(r.categories.non_srl)},
                         {"all", distribution(r.categories.all)}};

    out["widgets"] = oj::array();
    for (const auto& w : r.widgets) out["widgets"].push_back({{"widget", w.widget}, {"adds", w.adds}, {"loads", w.loads}});

    oj cities = oj::array(), countries = oj::array();
    for (const auto& g : r.cities)
        cities.push_back({{"city", g.city}, {"country", g.country}, {"requests", g.requests}, {"distinct_ips", g.distinct_ips}});
    for (const auto& g : r.countries)
        countries.push_back({{"country", g.country}, {"requests", g.requests}, {"distinct_ips", g.distinct_ips}});
    out["geo"] = {{"cities", cities}, {"countries", countries}};
    return out;
}

std::string to_csv(const UsageReport& r) {
    std::ostringstream os;
    auto row = [&](std::string_view section, std::string_view name, std::string_view field, const std::string& value) {
        os << csv_field(section) << ',' << csv_field(name) << ',' << csv_field(field) << ',' << csv_field(value) << '\n';
    };
    auto num = [](std::uint64_t v) { return std::to_string(v); };
    os << "section,name,field,value\n";

    row("parameters", "", "active_loads", std::to_string(r.rule.min_loads));
    row("parameters", "", "active_days", std::to_string(r.rule.min_days));
    const auto totals = to_json(r)["totals"];
    for (const auto& [k, v] : totals.items()) row("totals", "", k, v.dump());

    for (const auto& d : r.daily) {
        row("daily", d.day, "requests", num(d.requests));
        row("daily", d.day, "cumulative", num(d.cumulative));
        row("daily", d.day, "bytes", num(d.bytes));
        row("daily", d.day, "distinct_ips", num(d.distinct_ips));
    }
    for (auto k : all_op_kinds) row("operations", to_string(k), "count", num(r.operations.at(std::string(to_string(k)))));
    row("operations", "unclassified", "count", num(r.totals.unclassified));

    const auto& s = r.spaces;
    row("spaces", "", "seen", num(s.seen));
    row("spaces", "", "created", num(s.created));
    row("spaces", "", "active", num(s.active));
    row("spaces", "", "active_percent", tenths_text(percent_tenths(s.active, s.seen)));
    row("spaces", "", "srl_enabled", num(s.srl_enabled));
    row("spaces", "", "srl_active", num(s.srl_active));
    row("spaces", "", "srl_active_percent", tenths_text(percent_tenths(s.srl_active, s.srl_enabled)));
    row("spaces", "", "mean_srl_lifetime_days", tenths_text(mean_tenths(s.mean_srl_lifetime_days)));

    const auto& u = r.users;
    row("users", "", "active_users", num(u.active_users));
    for (auto [name, n] : {std::pair{"creators", u.creators}, std::pair{"joiners", u.joiners},
                           std::pair{"widget_adders", u.widget_adders}, std::pair{"re_openers", u.re_openers}}) {
        row("users", name, "count", num(n));
        row("users", name, "percent", tenths_text(percent_tenths(n, u.active_users)));
    }

    const auto labels = distribution_labels();
    for (auto [name, d] : {std::pair{"categories.srl", &r.categories.srl}, std::pair{"categories.non_srl", &r.categories.non_srl},
                           std::pair{"categories.all", &r.categories.all}}) {
        row(name, "", "adds", num(d->adds));
        const auto tenths = rounded_tenths(*d);
        for (std::size_t i = 0; i < labels.size(); ++i)
            row(name, labels[i], "percent", tenths ? tenths_text((*tenths)[i]) : "");
    }

    for (const auto& w : r.widgets) {
        row("widgets", w.widget, "adds", num(w.adds));
        row("widgets", w.widget, "loads", num(w.loads));
    }
    for (const auto& g : r.cities) {
        const auto name = g.country + "/" + g.city;
        row("geo.city", name, "requests", num(g.requests));
        row("geo.city", name, "distinct_ips", num(g.distinct_ips));
    }
    for (const auto& g : r.countries) {
        row("geo.country", g.country, "requests", num(g.requests));
        row("geo.country", g.country, "distinct_ips", num(g.distinct_ips));
    }
    return os.str();
}

void write_report(const UsageReport& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::parse_error, "cannot write " + path.string());
    if (path.extension() == ".csv")
        out << to_csv(r);
    else
        out << to_json(r).dump(2) << '\n';
}

}  // namespace role::analytics
