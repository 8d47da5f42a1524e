#include <finslab/connection.hpp>
#include <finslab/tensors.hpp>

#include <benchmark/benchmark.h>

using namespace finslab;

namespace {

void BM_FundamentalTensor(benchmark::State& state) {
    const auto m = builtin_metric("bogoslovsky-warped");
    const auto v = sample_admissible(m, 1, 5).front();
    for (auto _ : state) benchmark::DoNotOptimize(fundamental_tensor(m, v));
}

void BM_Christoffel(benchmark::State& state) {
    const auto m = builtin_metric("einstein-static");
    const auto v = sample_admissible(m, 1, 5).front();
    for (auto _ : state) benchmark::DoNotOptimize(christoffel(m, v));
}

void BM_JacobiOperator(benchmark::State& state) {
    const auto m = builtin_metric("einstein-static");
    const auto v = sample_admissible(m, 1, 5).front();
    const Vector w = Vector::Ones(3);
    for (auto _ : state) benchmark::DoNotOptimize(jacobi_operator(m, v, w));
}

} // namespace

BENCHMARK(BM_FundamentalTensor);
BENCHMARK(BM_Christoffel);
BENCHMARK(BM_JacobiOperator);
