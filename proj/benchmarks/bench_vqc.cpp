#include <benchmark/benchmark.h>

#include "tnvqc/vqc.hpp"

using namespace tnvqc;

namespace {

void bm_vqc_forward(benchmark::State& state) {
    const FeatureInput x{{0.4, -1.2, 2.3, 0.05}};
    const VqcParams p = VqcParams::random(3, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vqc_forward(x, p));
    }
    state.SetItemsProcessed(state.iterations());
}

void bm_vqc_backward(benchmark::State& state) {
    const FeatureInput x{{0.4, -1.2, 2.3, 0.05}};
    const VqcParams p = VqcParams::random(3, 0.5);
    const std::array<double, 2> upstream{1.0, -0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(vqc_backward(x, p, upstream));
    }
    state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(bm_vqc_forward);
BENCHMARK(bm_vqc_backward);
