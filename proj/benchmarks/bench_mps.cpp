#include <benchmark/benchmark.h>

#include <random>

#include "tnvqc/mps.hpp"

using namespace tnvqc;

namespace {

ProductState random_state(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> pix(0.0, 1.0);
    std::vector<std::array<double, 2>> sites(n);
    for (auto& s : sites) s = local_feature_map(pix(gen));
    return ProductState::unchecked(std::move(sites));
}

void bm_mps_forward(benchmark::State& state) {
    const auto chi = static_cast<std::size_t>(state.range(0));
    const auto model = init_mps(784, chi, 4, 391, 7);
    const auto input = random_state(784, 11);
    ContractionTrace trace;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mps_forward(model, input, trace));
    }
    state.SetItemsProcessed(state.iterations());
}

void bm_mps_forward_backward(benchmark::State& state) {
    const auto chi = static_cast<std::size_t>(state.range(0));
    const auto model = init_mps(784, chi, 4, 391, 7);
    const auto input = random_state(784, 11);
    ContractionTrace trace;
    MpsGradient grad;
    const std::array<double, 4> upstream{0.3, -0.2, 0.9, 0.1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(mps_forward(model, input, trace));
        mps_backward(model, trace, upstream, grad);
        benchmark::DoNotOptimize(grad.sites.front().data().data());
    }
    state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(bm_mps_forward)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(bm_mps_forward_backward)->Arg(1)->Arg(2)->Arg(4);
