#include <benchmark/benchmark.h>

#include <random>

#include "pfl/reduce.hpp"

namespace {

Eigen::MatrixXd random_rows(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd data(n, m);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < m; ++c)
            data(r, c) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return data;
}

void BM_ae_gradients(benchmark::State& state) {
    using namespace pfl::reduce;
    const auto dim = static_cast<int>(state.range(0));
    AEModel model = ae_make(stage1_arch(dim, dim / 16), 3);
    Eigen::MatrixXd batch = random_rows(64, dim, 4);
    for (auto _ : state) {
        auto grads = ae_gradients(model, batch);
        benchmark::DoNotOptimize(grads.d_weights.front().data());
    }
}

void BM_pca_fit(benchmark::State& state) {
    const auto m = static_cast<Eigen::Index>(state.range(0));
    Eigen::MatrixXd data = random_rows(4 * m, m, 5);
    for (auto _ : state) {
        auto model = pfl::reduce::pca_fit(data, static_cast<int>(m / 4));
        benchmark::DoNotOptimize(model.components.data());
    }
}

}  // namespace

BENCHMARK(BM_ae_gradients)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pca_fit)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
