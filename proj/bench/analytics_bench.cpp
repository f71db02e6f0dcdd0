// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <filesystem>

#include "role/analytics/kernels.hpp"
#include "role/analytics/report.hpp"
#include "role/analytics/synthetic.hpp"
#include "role/catalog.hpp"

using namespace role;
using namespace role::analytics;

namespace {

const std::filesystem::path data_dir = ROLE_DATA_DIR;

struct Fixture {
    Catalog catalog = load_catalog(data_dir / "default_catalog.json");
    LogInput input;
    PipelineInputs inputs;
    std::vector<AccessLogEntry> parsed;
    std::vector<AccessLogEntry> cleaned;

    Fixture() {
        SyntheticConfig cfg;
        cfg.entries = 200000;
        for (const auto& w : catalog.widgets()) cfg.widgets.push_back(w.id);
        input = {LogFormat::combined, generate_log(cfg)};
        inputs.catalog = &catalog;
        inputs.filters.bots = BotPatterns::load(data_dir / "analytics/bots.txt");
        inputs.filters.partners = PartnerSet::load(data_dir / "analytics/partners.txt");
        inputs.geo = GeoTable::load(data_dir / "analytics/geo.csv");
        inputs.srl_widgets = srl_widgets_of(catalog);
        parsed = parse_entries(input, {Execution::serial, 1}).entries;
        cleaned = clean(parsed, inputs.filters, {Execution::serial, 1}).kept;
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

ExecutionPolicy policy(const benchmark::State& state) {
    return state.range(0) == 0 ? ExecutionPolicy{Execution::serial, 1}
                               : ExecutionPolicy{Execution::parallel, static_cast<int>(state.range(0))};
}

void thread_args(benchmark::internal::Benchmark* b) {
    b->ArgName("threads")->Arg(0)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
}

void BM_parse(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(parse_entries(f.input, policy(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.input.lines.size()));
}

void BM_clean(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(clean(f.parsed, f.inputs.filters, policy(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.parsed.size()));
}

void BM_daily(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(daily_stats(f.cleaned, policy(state)));
}

void BM_geo(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(geo_summary(f.cleaned, f.inputs.geo, policy(state)));
}

void BM_extract(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(extract_operations(f.cleaned, policy(state)));
}

void BM_pipeline(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(analyze(f.input, f.inputs, policy(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.input.lines.size()));
}

}  // namespace

// threads:0 is the serial reference
BENCHMARK(BM_parse)->Apply(thread_args);
BENCHMARK(BM_clean)->Apply(thread_args);
BENCHMARK(BM_daily)->Apply(thread_args);
BENCHMARK(BM_geo)->Apply(thread_args);
BENCHMARK(BM_extract)->Apply(thread_args);
BENCHMARK(BM_pipeline)->Apply(thread_args);

BENCHMARK_MAIN();
