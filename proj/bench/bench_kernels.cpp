// Serial vs OpenMP timings of the three parallel kernels

#include "optswitch/majorant.hpp"
#include "optswitch/oracle.hpp"
#include "optswitch/solver.hpp"

#include <benchmark/benchmark.h>

using namespace optswitch;

namespace {

ValidatedProblem example2() {
    SwitchingProblem p;
    p.regimes[0].family = OrnsteinUhlenbeck{0.05, 5.0, 0.35};
    p.regimes[1].family = OrnsteinUhlenbeck{0.05, 1.0, 0.35};
    p.reward[1] = Reward{-0.4, 1.0, 0.0, 0.0, {}};
    p.cost_open.constant = 0.2;
    p.cost_close.constant = 0.2;
    p.discount = 0.105;
    p.lower = {0.0, BoundaryKind::Absorbing};
    return validate_problem(p);
}

ValidatedProblem example1() {
    SwitchingProblem p;
    p.regimes[0].family = GeometricBM{0.01, 0.25};
    p.regimes[1].family = GeometricBM{0.0, 0.25};
    p.reward[1] = Reward{-0.4, 1.0, 0.0, 0.0, {}};
    p.cost_open.constant = 2.0;
    p.cost_close.constant = 2.0;
    p.discount = 0.05;
    return validate_problem(p);
}

void BM_ScanJets(benchmark::State& state) {
    static const auto model = build_model(example2());
    const bool parallel = state.range(0) != 0;
    const auto xs = scan_states(*model, kClosed, 400);
    for (auto _ : state) benchmark::DoNotOptimize(state_jets_batch(*model, kClosed, xs, parallel));
}
BENCHMARK(BM_ScanJets)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
    static const auto p = example1();
    SimulationOptions o;
    o.paths = 2000;
    o.parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_policy(p, {0.18300303, 1.1504167}, 1.0, kClosed, o));
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ValueIteration(benchmark::State& state) {
    static const auto p = example2();
    static const auto grid = build_grid_scheme(p);
    ValueIterationOptions o;
    o.parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(value_iteration(p, grid, o));
}
BENCHMARK(BM_ValueIteration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SolveExample2(benchmark::State& state) {
    static const auto p = example2();
    SolveOptions o;
    o.parallel_scan = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(solve(p, o));
}
BENCHMARK(BM_SolveExample2)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
