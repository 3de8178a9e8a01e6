#include <latentdag/em.hpp>
#include <latentdag/simulate.hpp>

#include <benchmark/benchmark.h>

using namespace latentdag;

namespace {

void BM_RunEm(benchmark::State& state) {
    const SimBundle b = confounded_benchmark(2000, 1);
    EmConfig cfg;
    cfg.seed = 1;
    cfg.max_iter = static_cast<std::size_t>(state.range(0));
    cfg.epsilon = 0.0;
    cfg.bootstrap.n_boot = 10;
    for (auto _ : state) benchmark::DoNotOptimize(run_em(b.observed_data, cfg));
}
BENCHMARK(BM_RunEm)->Arg(2)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
