#include <benchmark/benchmark.h>

#include <random>

#include "tnvqc/tensor.hpp"

using namespace tnvqc;

namespace {

RealTensor random_tensor(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    RealTensor t(shape);
    for (double& v : t.data()) v = dist(gen);
    return t;
}

void bm_contract_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_tensor({n, n}, 1);
    const auto b = random_tensor({n, n}, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(contract(a, b, {{1, 0}}));
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}

void bm_contract_site_with_vector(benchmark::State& state) {
    const auto chi = static_cast<std::size_t>(state.range(0));
    const auto site = random_tensor({chi, 2, chi}, 3);
    const auto vec = random_tensor({2}, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(contract(site, vec, {{1, 0}}));
    }
    state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(bm_contract_matmul)->Arg(16)->Arg(64);
BENCHMARK(bm_contract_site_with_vector)->Arg(2)->Arg(8);
