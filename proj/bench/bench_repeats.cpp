// Serial reference loop against the OpenMP repeat kernel on the same grid cell.
#include <benchmark/benchmark.h>

#include <vector>

#include "coupledmc/harness.hpp"
#include "coupledmc/parallel.hpp"

using namespace coupledmc;

namespace {

ExperimentConfig bench_config(Method method, std::size_t n) {
    ExperimentConfig cfg = preset_config(Preset::custom);
    cfg.methods = {method};
    cfg.p_values = {3.0};
    cfg.n_grid = {n};
    cfg.repeats = 2000;
    cfg.master_seed = 1;
    return cfg;
}

void run_cell(benchmark::State& state, Method method, bool parallel) {
    const auto n = static_cast<std::size_t>(state.range(0));
    ExperimentConfig cfg = bench_config(method, n);
    cfg.workers = parallel ? hardware_workers() : 1;
    const ProblemSpec spec = exponential_pair_for_order(3.0);
    const Cell cell = expand_cells(cfg).front();
    std::vector<RepeatResult> out(cfg.repeats);
    for (auto _ : state) {
        auto body = [&](std::uint64_t r) { out[r] = run_repeat(cfg, spec, cell, r); };
        if (parallel) {
            for_each_repeat(cfg.repeats, cfg.workers, body);
        } else {
            for_each_repeat_serial(cfg.repeats, body);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cfg.repeats));
    state.counters["workers"] = cfg.workers;
}

void BM_SnisSerial(benchmark::State& s) { run_cell(s, Method::snis, false); }
void BM_SnisOpenMP(benchmark::State& s) { run_cell(s, Method::snis, true); }
void BM_SuisSerial(benchmark::State& s) { run_cell(s, Method::suis, false); }
void BM_SuisOpenMP(benchmark::State& s) { run_cell(s, Method::suis, true); }

} // namespace

BENCHMARK(BM_SnisSerial)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SnisOpenMP)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuisSerial)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuisOpenMP)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
