#include <benchmark/benchmark.h>

#include "ottolab/bridge.hpp"
#include "ottolab/manifold.hpp"
#include "ottolab/toy.hpp"

using namespace ottolab;

namespace {

constexpr double kTwoPi = 6.283185307179586;

void BM_HeatApplyCircle(benchmark::State& state) {
    auto M = GridManifold::build(ManifoldKind::circle, static_cast<int>(state.range(0)), kTwoPi);
    ScalarField f = ScalarField::from_function(M, [](double x) { return std::cos(3 * x) + 0.2 * std::sin(7 * x); });
    for (auto _ : state) {
        ScalarField out = heat_apply(f, 0.1);
        benchmark::DoNotOptimize(out.values.data());
    }
}
BENCHMARK(BM_HeatApplyCircle)->Arg(256)->Arg(512);

void BM_Gamma2Circle(benchmark::State& state) {
    auto M = GridManifold::build(ManifoldKind::circle, static_cast<int>(state.range(0)), kTwoPi);
    ScalarField f = ScalarField::from_function(M, [](double x) { return std::sin(x) + 0.3 * std::cos(5 * x); });
    for (auto _ : state) {
        ScalarField out = gamma2(f);
        benchmark::DoNotOptimize(out.values.data());
    }
}
BENCHMARK(BM_Gamma2Circle)->Arg(256)->Arg(512);

void BM_MehlerHeatOu(benchmark::State& state) {
    auto M = GridManifold::build(ManifoldKind::ou_line, static_cast<int>(state.range(0)), 6.0);
    ScalarField f = ScalarField::from_function(M, [](double x) { return std::exp(-0.5 * x * x); });
    for (auto _ : state) {
        ScalarField out = heat_apply(f, 0.5);
        benchmark::DoNotOptimize(out.values.data());
    }
}
BENCHMARK(BM_MehlerHeatOu)->Arg(128)->Arg(256);

void BM_IpfpCircleBump(benchmark::State& state) {
    auto M = GridManifold::build(ManifoldKind::circle, static_cast<int>(state.range(0)), kTwoPi);
    Density mu = Density::normalized(ScalarField::from_function(M, [](double x) { return 1 + 0.5 * std::cos(x); }));
    Density nu = Density::normalized(ScalarField::from_function(M, [](double x) { return 1 - 0.5 * std::cos(x); }));
    for (auto _ : state) {
        auto pots = ipfp_solve(M, 0.5, mu, nu, 1e-12, 200);
        benchmark::DoNotOptimize(pots.log_f.data());
    }
}
BENCHMARK(BM_IpfpCircleBump)->Arg(256);

void BM_ToyNewtonBvp(benchmark::State& state) {
    FModel F = FModel::quadratic(1.0, 1);
    Eigen::VectorXd x(1), y(1);
    x << 0.0;
    y << 1.0;
    for (auto _ : state) {
        ToyPath path = solve_newton_bvp(F, x, y, 1.0, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(path.states.data());
    }
}
BENCHMARK(BM_ToyNewtonBvp)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
