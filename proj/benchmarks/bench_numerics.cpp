#include <benchmark/benchmark.h>

#include "adadata/numerics/lstm.hpp"
#include "adadata/numerics/ops.hpp"

using namespace adadata::num;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng &rng) {
    std::vector<double> v(rows * cols);
    for (auto &x : v) x = rng.uniform(-1.0, 1.0);
    return Tensor::from({rows, cols}, std::move(v));
}

void BM_Matmul(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const auto a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b).data().data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_LstmStep(benchmark::State &state) {
    const auto hidden = static_cast<std::size_t>(state.range(0));
    const std::size_t batch = 32;
    Rng rng(2);
    const auto w = LstmWeights::init(hidden, hidden, rng);
    const auto x = random_matrix(batch, hidden, rng);
    const auto h = Tensor::zeros({batch, hidden}), c = Tensor::zeros({batch, hidden});
    for (auto _ : state) benchmark::DoNotOptimize(lstm_cell(x, h, c, w).first.data().data());
}
BENCHMARK(BM_LstmStep)->Arg(64)->Arg(128);

void BM_LstmStepBackward(benchmark::State &state) {
    const auto hidden = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    auto w = LstmWeights::init(hidden, hidden, rng);
    w.w.set_requires_grad(true);
    w.b.set_requires_grad(true);
    const auto x = random_matrix(32, hidden, rng);
    for (auto _ : state) {
        Tape tape;
        Tensor h = Tensor::zeros({32, hidden}), c = Tensor::zeros({32, hidden});
        for (int t = 0; t < 10; ++t) std::tie(h, c) = lstm_cell(x, h, c, w);
        tape.backward(sum(h));
        w.w.zero_grad();
        w.b.zero_grad();
    }
}
BENCHMARK(BM_LstmStepBackward)->Arg(64);

} // namespace
