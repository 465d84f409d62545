#include <benchmark/benchmark.h>

#include "adadata/streamdecode/streamdecode.hpp"

using namespace adadata;

namespace {

simul::SimulModel bench_model() {
    simul::SimulConfig cfg;
    cfg.emb_dim = cfg.hidden_dim = 64;
    return simul::SimulModel(cfg, 60, 60);
}

std::vector<int> bench_source(std::size_t n) {
    std::vector<int> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 4 + static_cast<int>((i * 7) % 50);
    return x;
}

void BM_AdaptiveDecode(benchmark::State &state) {
    const auto model = bench_model();
    const auto x = bench_source(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stream::adaptive_decode(model, x).tokens.size());
}
BENCHMARK(BM_AdaptiveDecode)->Arg(10)->Arg(20);

void BM_WaitKDecode(benchmark::State &state) {
    const auto model = bench_model();
    const auto x = bench_source(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stream::waitk_decode(model, x, 3).tokens.size());
}
BENCHMARK(BM_WaitKDecode)->Arg(10)->Arg(20);

void BM_FullDecode(benchmark::State &state) {
    const auto model = bench_model();
    const auto x = bench_source(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stream::full_decode(model, x).tokens.size());
}
BENCHMARK(BM_FullDecode)->Arg(10)->Arg(20);

} // namespace
