#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "kslab/exponents.hpp"
#include "kslab/grid.hpp"
#include "kslab/kinetics.hpp"
#include "kslab/monitors.hpp"
#include "kslab/solver.hpp"

using namespace kslab;

static void BM_Step(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const RadialGrid g = build_graded_grid(3, 1.0, N, 1.0);
    const KineticFunctions kin = prototype_kinetics(1.0, 1.0);
    const FieldState init = make_bump_initial(g, 0.5, 0.2, 0.1, 0.0);
    const SolverConfig cfg;
    for (auto _ : state) {
        FieldState next = step(g, kin, nullptr, init, 1e-6, cfg);
        benchmark::DoNotOptimize(next.u.data());
    }
    state.SetItemsProcessed(state.iterations() * N);
}
BENCHMARK(BM_Step)->Arg(128)->Arg(512)->Arg(2048);

static void BM_RadialLaplacian(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const RadialGrid g = build_graded_grid(3, 1.0, N, 1.0);
    std::vector<double> u(N);
    for (int k = 0; k < N; ++k) u[k] = std::cos(M_PI * g.centers[k]);
    for (auto _ : state) {
        auto lap = radial_laplacian(g, u);
        benchmark::DoNotOptimize(lap.data());
    }
    state.SetItemsProcessed(state.iterations() * N);
}
BENCHMARK(BM_RadialLaplacian)->Arg(512)->Arg(4096);

static void BM_WeightedSup(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const RadialGrid g = build_graded_grid(3, 1.0, N, 1.0);
    std::vector<double> u(N);
    for (int k = 0; k < N; ++k) u[k] = 1.0 / (0.01 + g.centers[k] * g.centers[k]);
    for (auto _ : state) benchmark::DoNotOptimize(weighted_sup(g, u, 6.5));
}
BENCHMARK(BM_WeightedSup)->Arg(512)->Arg(4096);

static void BM_DeriveExponents(benchmark::State& state) {
    const ModelParams p;
    DeriveOptions opt;
    opt.moser_J = 40;
    for (auto _ : state) {
        auto d = derive_exponents(p, opt);
        benchmark::DoNotOptimize(d.moser.p.data());
    }
}
BENCHMARK(BM_DeriveExponents);

BENCHMARK_MAIN();
