#include <benchmark/benchmark.h>

#include "lgi/dynamics.hpp"
#include "lgi/optimizer.hpp"
#include "lgi/protocol.hpp"
#include "lgi/quantum.hpp"

namespace {

void BM_Propagate(benchmark::State& state) {
    const lgi::Evolution evolution(lgi::DephasingModel::diag45(0.7));
    const lgi::DensityMatrix rho = lgi::pure_state(0.4);
    double t = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evolution.propagate(rho, t));
        t += 1e-3;
    }
}
BENCHMARK(BM_Propagate);

void BM_LgRun(benchmark::State& state) {
    const lgi::Evolution evolution(lgi::DephasingModel::x_basis(0.5));
    const lgi::DensityMatrix rho = lgi::pure_state(0.5);
    const lgi::MeasurementSetting setting(0.9, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(lgi::lg_run(rho, setting, evolution, 0.5));
}
BENCHMARK(BM_LgRun);

void BM_ProblemSetup(benchmark::State& state) {
    lgi::SearchConfig config;
    config.theta_points = static_cast<int>(state.range(0));
    config.phi_points = config.theta_points / 2;
    config.dt_points = config.theta_points * 4;
    for (auto _ : state) {
        const lgi::CanonicalProblem problem(lgi::pure_state(0.5), lgi::DephasingModel::z_basis(0.5),
                                            config);
        benchmark::DoNotOptimize(problem.grid_size());
    }
}
BENCHMARK(BM_ProblemSetup)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Optimize(benchmark::State& state) {
    const lgi::CanonicalProblem problem(lgi::pure_state(0.5), lgi::DephasingModel::z_basis(0.5));
    double delta = -0.2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(problem.optimize({delta, 1e-4}));
        delta = delta > 0.7 ? -0.2 : delta + 0.05;
    }
}
BENCHMARK(BM_Optimize)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
