#include <medzisc/data.hpp>
#include <medzisc/pipeline.hpp>
#include <medzisc/simulation.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace medzisc;

ScenarioConfig scenario(std::int64_t n, std::int64_t c, std::int64_t g) {
    ScenarioConfig config;
    config.subjects = static_cast<std::size_t>(n);
    config.cells = static_cast<std::size_t>(c);
    config.genes = static_cast<std::size_t>(g);
    return config;
}

void BM_GenerateCells(benchmark::State& state) {
    const ScenarioConfig config = scenario(state.range(0), state.range(1), state.range(2));
    for (auto _ : state) benchmark::DoNotOptimize(generate_replicate(config, 0));
}
BENCHMARK(BM_GenerateCells)->Args({100, 100, 100})->Unit(benchmark::kMillisecond);

void BM_Aggregate(benchmark::State& state) {
    const SimulatedDataset data = generate_replicate(scenario(state.range(0), state.range(1), state.range(2)), 0);
    for (auto _ : state) benchmark::DoNotOptimize(aggregate_pseudobulk(data.cells, data.subjects, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1) * state.range(2));
}
BENCHMARK(BM_Aggregate)->Args({100, 100, 100})->Args({400, 100, 100})->Unit(benchmark::kMillisecond);

PseudobulkDataset replicate(std::int64_t n, std::int64_t g) {
    return filter_degenerate_genes(generate_pseudobulk_replicate(scenario(n, 100, g), 0).dataset).dataset;
}

void BM_MedZIsc(benchmark::State& state) {
    const PseudobulkDataset d = replicate(state.range(0), state.range(1));
    const AnalysisConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(run_medzisc(d, config));
}
BENCHMARK(BM_MedZIsc)->Args({100, 100})->Args({400, 100})->Unit(benchmark::kMillisecond);

void BM_Naive(benchmark::State& state) {
    const PseudobulkDataset d = replicate(state.range(0), state.range(1));
    const AnalysisConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(run_naive(d, config));
}
BENCHMARK(BM_Naive)->Args({100, 100})->Args({400, 100})->Unit(benchmark::kMillisecond);

}  // namespace
