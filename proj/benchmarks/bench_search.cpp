#include <latentdag/score.hpp>
#include <latentdag/search.hpp>
#include <latentdag/simulate.hpp>

#include <benchmark/benchmark.h>

using namespace latentdag;

namespace {

void BM_HillClimb(benchmark::State& state) {
    const auto children = static_cast<std::size_t>(state.range(0));
    const SimBundle b = confounded_benchmark(2000, 1, children);
    SearchConfig cfg;
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(hill_climb(b.observed_data, {}, cfg));
    state.counters["nodes"] = static_cast<double>(b.observed_data.cols());
}
BENCHMARK(BM_HillClimb)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_FitDag(benchmark::State& state) {
    const SimBundle b = confounded_benchmark(static_cast<std::size_t>(state.range(0)), 1);
    const Dag dag = b.truth.sem.dag();
    for (auto _ : state) benchmark::DoNotOptimize(fit_dag(b.full_data, dag));
}
BENCHMARK(BM_FitDag)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_BootstrapConsensus(benchmark::State& state) {
    const SimBundle b = confounded_benchmark(2000, 1);
    BootstrapConfig cfg;
    cfg.n_boot = static_cast<std::size_t>(state.range(0));
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap_consensus(b.observed_data, {}, cfg));
}
BENCHMARK(BM_BootstrapConsensus)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
