#include <benchmark/benchmark.h>

#include <random>

#include "vsnt/model.hpp"
#include "vsnt/ops.hpp"
#include "vsnt/recurrent.hpp"
#include "vsnt/transform.hpp"

namespace {

using vsnt::Tensor;

Tensor<float> random_tensor(vsnt::Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.f, 1.f);
    std::vector<float> v(vsnt::shape_numel(shape));
    for (auto& x : v) x = u(rng);
    return Tensor<float>(std::move(shape), std::move(v));
}

void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
    vsnt::NoGradGuard no_grad;
    for (auto _ : state) benchmark::DoNotOptimize(vsnt::matmul(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_Conv2dSame(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    auto x = random_tensor({16, 16, side, side}, 3);
    auto k = random_tensor({32, 16, 3, 3}, 4);
    auto b = random_tensor({32}, 5);
    vsnt::NoGradGuard no_grad;
    for (auto _ : state) benchmark::DoNotOptimize(vsnt::conv2d(x, k, b, 1, vsnt::Padding::same));
}
BENCHMARK(BM_Conv2dSame)->Arg(16)->Arg(32);

void BM_GruSequence(benchmark::State& state) {
    vsnt::Rng rng(6);
    vsnt::GruCell<float> cell(1024, 32, rng);
    auto features = random_tensor({4, 16, 1024}, 7);
    vsnt::NoGradGuard no_grad;
    for (auto _ : state) benchmark::DoNotOptimize(cell.run(features));
}
BENCHMARK(BM_GruSequence);

void BM_ResizeFrame(benchmark::State& state) {
    vsnt::Frame f(240, 320, 0.f);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    for (auto& p : f.pixels) p = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(vsnt::resize_frame(f, 112));
}
BENCHMARK(BM_ResizeFrame);

void BM_DeskModelPredict(benchmark::State& state) {
    vsnt::ModelConfig cfg;
    cfg.frame_size = 32;
    cfg.seq_len = 16;
    vsnt::Model model(cfg, 9);
    auto x = random_tensor({1, 16, 3, 32, 32}, 10);
    for (auto _ : state) benchmark::DoNotOptimize(model.predict(x));
}
BENCHMARK(BM_DeskModelPredict);

}  // namespace

BENCHMARK_MAIN();
