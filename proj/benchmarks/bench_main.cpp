#include <benchmark/benchmark.h>

#include "comets/eval/metrics.hpp"
#include "comets/gan/model.hpp"
#include "comets/nn/layers.hpp"
#include "comets/nn/ops.hpp"

using namespace comets;

namespace {

nn::Tensor noise(nn::Shape shape, Rng& rng) {
    nn::Tensor t(std::move(shape));
    for (auto& v : t.storage()) v = standard_normal(rng);
    return t;
}

std::vector<int> bins(std::size_t batch, std::size_t len) {
    std::vector<int> b(batch * len);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = ts::minute_bin(static_cast<int>(i % len));
    return b;
}

void BM_Conv1dForwardBackward(benchmark::State& state) {
    const auto width = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    nn::Conv1d conv(width, width, 3, 2, 1, nn::Padding::Causal, false, rng);
    nn::Var x(noise({64, 24, width}, rng), true);
    for (auto _ : state) {
        auto y = nn::sum(conv.forward(x, {}));
        nn::backward(y);
        benchmark::DoNotOptimize(y.item());
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Conv1dForwardBackward)->Arg(16)->Arg(64)->Arg(128);

void BM_GeneratorForward(benchmark::State& state) {
    const auto channels = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    const auto cfg = gan::GanConfig::make(24, 24, channels);
    gan::Generator g(cfg.generator, rng);
    const nn::Var past(noise({32, 24, channels}, rng)), z(noise({32, 24, channels}, rng));
    const auto b = bins(32, 24);
    nn::NoGradGuard ng;
    for (auto _ : state) benchmark::DoNotOptimize(g.forward(past, z, b, {}).item());
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_GeneratorForward)->Arg(5)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_CriticForwardBackward(benchmark::State& state) {
    const auto channels = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    const auto cfg = gan::GanConfig::make(24, 24, channels);
    gan::Critic critic(cfg.critic, rng);
    nn::Var past(noise({32, 24, channels}, rng)), fut(noise({32, 24, channels}, rng), true);
    const auto b = bins(32, 48);
    for (auto _ : state) {
        auto y = nn::sum(critic.forward(past, fut, b, {}).o);
        nn::backward(y);
        benchmark::DoNotOptimize(y.item());
    }
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_CriticForwardBackward)->Arg(5)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_WindowedCorrelations(benchmark::State& state) {
    Rng rng(4);
    Matrix m(static_cast<std::size_t>(state.range(0)), 2);
    for (auto& v : m.data()) v = standard_normal(rng);
    for (auto _ : state) benchmark::DoNotOptimize(eval::windowed_correlations(m, 0, 1, {390, 1}).size());
}
BENCHMARK(BM_WindowedCorrelations)->Arg(9360)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
