#include <benchmark/benchmark.h>

#include <random>

#include "pfl/spectral.hpp"

namespace {

pfl::Field2D make_field(int n, std::uint64_t seed) {
    pfl::Field2D f(pfl::GridSpec{n, n, 1.0, 1.0});
    std::mt19937_64 rng(seed);
    for (double& v : f.values) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return f;
}

void BM_dft2_forward(benchmark::State& state) {
    auto f = make_field(static_cast<int>(state.range(0)), 7);
    for (auto _ : state) {
        auto s = pfl::spectral::dft2_forward(f);
        benchmark::DoNotOptimize(s.values.data());
    }
    state.SetComplexityN(state.range(0) * state.range(0));
}

void BM_dft2_round_trip(benchmark::State& state) {
    auto f = make_field(static_cast<int>(state.range(0)), 8);
    for (auto _ : state) {
        auto back = pfl::spectral::dft2_inverse(pfl::spectral::dft2_forward(f));
        benchmark::DoNotOptimize(back.values.data());
    }
}

}  // namespace

BENCHMARK(BM_dft2_forward)->Arg(64)->Arg(128)->Arg(256)->Complexity();
BENCHMARK(BM_dft2_round_trip)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
