#include "role/analytics/kernels.hpp"

#include <omp.h>


namespace role::analytics {

namespace {

int thread_count(ExecutionPolicy p) {
    if (p.mode == Execution::serial) return 1;
    return p.threads > 0 ? p.threads : omp_get_max_threads();
}

std::optional<AccessLogEntry> parse_line(const std::string& line, LogFormat format) {
    if (format == LogFormat::combined) return parse_clf_line(line);
    try {
        return event_to_entry(event_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Runs fn(i) for i in [0, n), each index independent of the others.
template <typename Fn>
void for_each_index(std::size_t n, ExecutionPolicy p, Fn fn) {
    const int threads = thread_count(p);
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

// Per-thread partial accumulation over contiguous chunks, merged in thread order.
template <typename Acc, typename Step, typename Merge>
Acc reduce_chunks(std::size_t n, ExecutionPolicy p, Step step, Merge merge) {
    const int threads = thread_count(p);
    std::vector<Acc> partial(static_cast<std::size_t>(threads));
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel num_threads(threads) if (threads > 1)
    {
        const int t = omp_get_thread_num();
        const int nt = omp_get_num_threads();
        const std::int64_t begin = count * t / nt;
        const std::int64_t end = count * (t + 1) / nt;
        for (std::int64_t i = begin; i < end; ++i) step(partial[static_cast<std::size_t>(t)], static_cast<std::size_t>(i));
    }
    Acc out = std::move(partial.front());
    for (std::size_t t = 1; t < partial.size(); ++t) merge(out, std::move(partial[t]));
    return out;
}

void merge_stats(GeoStats& into, GeoStats&& from) {
    into.requests += from.requests;
    into.ips.merge(from.ips);
}

}  // namespace

ParsedLog parse_entries(const LogInput& input, ExecutionPolicy policy) {
    std::vector<std::optional<AccessLogEntry>> slots(input.lines.size());
    for_each_index(slots.size(), policy, [&](std::size_t i) { slots[i] = parse_line(input.lines[i], input.format); });
    ParsedLog out;
    out.entries.reserve(slots.size());
    for (auto& s : slots) {
        if (s)
            out.entries.push_back(std::move(*s));
        else
            ++out.malformed;
    }
    return out;
}

CleanResult clean(const std::vector<AccessLogEntry>& entries, const Filters& filters, ExecutionPolicy policy) {
    std::vector<Removal> verdicts(entries.size());
    for_each_index(entries.size(), policy, [&](std::size_t i) { verdicts[i] = filters.verdict(entries[i]); });
    CleanResult out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        switch (verdicts[i]) {
            case Removal::kept: out.kept.push_back(entries[i]); break;
            case Removal::bot: ++out.bots; break;
            case Removal::partner: ++out.partners; break;
            case Removal::static_content: ++out.static_content; break;
        }
    }
    return out;
}

std::map<std::int64_t, DayStats> daily_stats(const std::vector<AccessLogEntry>& entries, ExecutionPolicy policy) {
    using Acc = std::map<std::int64_t, DayStats>;
    return reduce_chunks<Acc>(
        entries.size(), policy,
        [&](Acc& acc, std::size_t i) {
            auto& d = acc[day_number(entries[i].ts)];
            ++d.requests;
            d.bytes += entries[i].bytes;
            d.ips.insert(entries[i].ip);
        },
        [](Acc& into, Acc&& from) {
            for (auto& [day, s] : from) {
                auto& d = into[day];
                d.requests += s.requests;
                d.bytes += s.bytes;
                d.ips.merge(s.ips);
            }
        });
}

GeoSummary geo_summary(const std::vector<AccessLogEntry>& entries, const GeoTable& geo, ExecutionPolicy policy) {
    return reduce_chunks<GeoSummary>(
        entries.size(), policy,
        [&](GeoSummary& acc, std::size_t i) {
            const auto& rec = geo.lookup(entries[i].ip);
            auto& city = acc.cities[{rec.country, rec.city}];
            ++city.requests;
            city.ips.insert(entries[i].ip);
            auto& country = acc.countries[rec.country];
            ++country.requests;
            country.ips.insert(entries[i].ip);
        },
        [](GeoSummary& into, GeoSummary&& from) {
            for (auto& [k, s] : from.cities) merge_stats(into.cities[k], std::move(s));
            for (auto& [k, s] : from.countries) merge_stats(into.countries[k], std::move(s));
        });
}

ExtractResult extract_operations(const std::vector<AccessLogEntry>& cleaned, ExecutionPolicy policy) {
    enum class Kind : std::uint8_t { other, op, unclassified };
    std::vector<std::optional<Operation>> ops(cleaned.size());
    std::vector<Kind> kinds(cleaned.size(), Kind::other);
    for_each_index(cleaned.size(), policy, [&](std::size_t i) {
        if (!is_api_path(cleaned[i].path())) return;
        ops[i] = classify_request(cleaned[i]);
        kinds[i] = ops[i] ? Kind::op : Kind::unclassified;
    });
    ExtractResult r;
    for (std::size_t i = 0; i < cleaned.size(); ++i) {
        if (kinds[i] == Kind::other) continue;
        ++r.api_requests;
        if (kinds[i] == Kind::op)
            r.ops.push_back(std::move(*ops[i]));
        else
            ++r.unclassified;
    }
    return r;
}

}  // namespace role::analytics
