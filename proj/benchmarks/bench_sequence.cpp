#include <benchmark/benchmark.h>

#include <random>

#include "pfl/sequence.hpp"

namespace {

using namespace pfl::seq;

SeqSample sample_for(int T, int latent, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd latents(T, latent);
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < latent; ++j)
            latents(t, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return make_seq_sample(latents, 0.5, 1.2, 0.5);
}

void BM_lstm_rollout(benchmark::State& state) {
    const int latent = 64, F = latent + 3;
    SeqModel model = seq_make(CellKind::lstm, 2, static_cast<int>(state.range(0)), F, latent, 9);
    SeqSample sample = sample_for(50, latent, 10);
    RolloutSpec spec;
    spec.horizon = 5;
    for (auto _ : state) {
        auto pred = seq_forward(model, sample, spec);
        benchmark::DoNotOptimize(pred.data());
    }
}

void BM_bptt_gradients(benchmark::State& state) {
    const int latent = 64, F = latent + 3;
    SeqModel model = seq_make(CellKind::lstm, 2, static_cast<int>(state.range(0)), F, latent, 11);
    std::vector<SeqSample> batch{sample_for(50, latent, 12), sample_for(50, latent, 13)};
    RolloutSpec spec;
    spec.horizon = 5;
    for (auto _ : state) {
        auto grads = bptt_gradients(model, batch, spec);
        benchmark::DoNotOptimize(grads.d_w_out.data());
    }
}

}  // namespace

BENCHMARK(BM_lstm_rollout)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bptt_gradients)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
