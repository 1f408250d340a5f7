#include <benchmark/benchmark.h>

#include "nextpm/config.hpp"
#include "nextpm/costs.hpp"

using namespace nextpm;

namespace {

SystemConfig bench_config() {
    auto cfg = load_config(std::string(NEXTPM_FIXTURES) + "/table1_d10.json");
    return cfg;
}

McSettings settings(std::int64_t reps) {
    McSettings m;
    m.replications = static_cast<std::size_t>(reps);
    m.seed = 7;
    return m;
}

void BM_TablesParallel(benchmark::State& st) {
    const auto cfg = bench_config();
    const auto state = SystemState::fresh(cfg);
    const auto mc = settings(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(build_cost_tables(cfg, state, mc));
    st.SetItemsProcessed(st.iterations() * st.range(0) * static_cast<std::int64_t>(cfg.components.size()));
}

void BM_TablesSerial(benchmark::State& st) {
    const auto cfg = bench_config();
    const auto state = SystemState::fresh(cfg);
    const auto mc = settings(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(build_cost_tables_serial(cfg, state, mc));
    st.SetItemsProcessed(st.iterations() * st.range(0) * static_cast<std::int64_t>(cfg.components.size()));
}

}  // namespace

BENCHMARK(BM_TablesParallel)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TablesSerial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
