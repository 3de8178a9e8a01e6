#include <latentdag/latent_pca.hpp>
#include <latentdag/random.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace latentdag;

namespace {

ResidualMatrix noise(Eigen::Index rows, Eigen::Index cols) {
    Rng rng(7);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd v(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) v(i, j) = normal(rng);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < cols; ++j) names.push_back("R" + std::to_string(j));
    return ResidualMatrix(names, v);
}

void BM_Pca(benchmark::State& state) {
    const ResidualMatrix r = noise(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(pca(r));
}
BENCHMARK(BM_Pca)->Args({2000, 70})->Args({8000, 70})->Unit(benchmark::kMillisecond);

void BM_ParallelAnalysis(benchmark::State& state) {
    const ResidualMatrix r = noise(2000, 70);
    const auto threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(parallel_analysis(r, 50, 0.95, 1, threads));
}
BENCHMARK(BM_ParallelAnalysis)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
