#include <finslab/jets.hpp>
#include <finslab/metric.hpp>

#include <benchmark/benchmark.h>

using namespace finslab;

namespace {

void BM_MetricJet(benchmark::State& state, const char* name) {
    const auto m = builtin_metric(name);
    const auto v = sample_admissible(m, 1, 3).front();
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(m.jet(v, order));
}

void BM_MetricValue(benchmark::State& state) {
    const auto m = builtin_metric("bogoslovsky-warped");
    const auto v = sample_admissible(m, 1, 3).front();
    for (auto _ : state) benchmark::DoNotOptimize(m.value(v));
}

} // namespace

BENCHMARK_CAPTURE(BM_MetricJet, einstein_static, "einstein-static")->DenseRange(2, 4);
BENCHMARK_CAPTURE(BM_MetricJet, bogoslovsky_warped, "bogoslovsky-warped")->DenseRange(2, 4);
BENCHMARK(BM_MetricValue);
