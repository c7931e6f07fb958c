#include <benchmark/benchmark.h>

#include "pfl/phasefield.hpp"

namespace {

void BM_semi_implicit_step(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    pfl::GridSpec grid{n, n, 1.0, 1.0};
    pfl::pf::PFParams p;
    p.x0 = 0.5;
    p.mobility = 1.2;
    p.kappa = 0.5;
    auto wt = pfl::spectral::wave_table(grid);
    pfl::Field2D f = pfl::pf::init_field(grid, p.x0, p.noise_amp, 42);
    for (auto _ : state) {
        f = pfl::pf::step_semi_implicit(f, p, wt);
        benchmark::DoNotOptimize(f.values.data());
    }
}

void BM_free_energy(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    pfl::GridSpec grid{n, n, 1.0, 1.0};
    pfl::pf::PFParams p;
    pfl::Field2D f = pfl::pf::init_field(grid, 0.5, 0.05, 42);
    for (auto _ : state) benchmark::DoNotOptimize(pfl::pf::free_energy(f, p));
}

}  // namespace

BENCHMARK(BM_semi_implicit_step)->Arg(64)->Arg(128);
BENCHMARK(BM_free_energy)->Arg(64)->Arg(128);
