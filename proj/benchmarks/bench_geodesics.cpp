#include <finslab/conformal.hpp>
#include <finslab/geodesics.hpp>
#include <finslab/variational.hpp>

#include <benchmark/benchmark.h>

#include <numbers>

using namespace finslab;

namespace {

Vector v3(double a, double b, double c) {
    Vector v(3);
    v << a, b, c;
    return v;
}

void BM_Geodesic(benchmark::State& state) {
    const auto m = builtin_metric("einstein-static");
    const double h = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(integrate_geodesic(m, v3(0, 1.2, 0), v3(1.1, 0.4, 0.7), 0.0, 1.0, h));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FocalSearch(benchmark::State& state) {
    const auto m = builtin_metric("einstein-static");
    const auto gamma = integrate_geodesic(m, v3(0, std::numbers::pi / 2, 0), v3(1, 0, 1), 0.0, 4.0, 5e-3);
    const auto P = SubmanifoldPatch::point(gamma.position(0));
    for (auto _ : state) benchmark::DoNotOptimize(find_focal_points(gamma, P, m));
}

void BM_FocalCorrespondence(benchmark::State& state) {
    const auto m = builtin_metric("einstein-static");
    const auto lambda = builtin_metric("einstein-factor");
    const auto gamma = integrate_geodesic(conformal_product(m, lambda), v3(0, std::numbers::pi / 2, 0),
                                          v3(1, 0.6, 0.8), 0.0, 4.0, 5e-3);
    const auto P = SubmanifoldPatch::point(gamma.position(0));
    for (auto _ : state) benchmark::DoNotOptimize(verify_focal_correspondence(gamma, P, lambda, m));
}

} // namespace

BENCHMARK(BM_Geodesic)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FocalSearch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FocalCorrespondence)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
