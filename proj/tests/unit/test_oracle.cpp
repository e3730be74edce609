#include "optswitch/error.hpp"
#include "optswitch/noswitch.hpp"
#include "optswitch/oracle.hpp"
#include "optswitch/solver.hpp"
#include "test_problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace optswitch;
using testing_problems::example1;
using testing_problems::example2;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no Error thrown";
    return ErrorCode::ConfigError;
}

SimulationOptions small_run(std::int64_t paths) {
    SimulationOptions o;
    o.paths = paths;
    o.seed = 7;
    return o;
}

}  // namespace

TEST(GridScheme, TransitionWeightsFormSubstochasticChain) {
    for (const auto& problem : {example1(), example2()}) {
        const GridScheme g = build_grid_scheme(validate_problem(problem));
        ASSERT_EQ(g.size(), 2000u);
        for (int r = 0; r < 2; ++r)
            for (std::size_t j = 1; j + 1 < g.size(); ++j) {
                EXPECT_GE(g.p_up[r][j], 0.0);
                EXPECT_GE(g.p_down[r][j], 0.0);
                EXPECT_LT(g.p_up[r][j] + g.p_down[r][j], 1.0);
            }
    }
}

TEST(GridScheme, DefaultSpacingAndEndpoints) {
    const GridScheme g1 = build_grid_scheme(validate_problem(example1()));
    EXPECT_EQ(g1.spacing, GridSpacing::Logarithmic);
    EXPECT_NEAR(g1.x.front(), 1e-4, 1e-12);
    EXPECT_NEAR(g1.x.back(), 1e4, 1e-6);

    const GridScheme g2 = build_grid_scheme(validate_problem(example2()));
    EXPECT_EQ(g2.spacing, GridSpacing::Uniform);
    EXPECT_TRUE(g2.lower_absorbing);
    EXPECT_EQ(g2.x.front(), 0.0);
}

TEST(GridScheme, ForcedCentralDifferencingOnCoarseGridIsUnstable) {
    GridOptions o;
    o.nodes = 20;
    o.drift = DriftDifferencing::Central;
    EXPECT_EQ(code_of([&] { build_grid_scheme(validate_problem(example2()), o); }), ErrorCode::SchemeUnstable);
    o.drift = DriftDifferencing::Hybrid;
    EXPECT_NO_THROW(build_grid_scheme(validate_problem(example2()), o));
}

TEST(GridScheme, InterpolationOutsideGridThrows) {
    const GridScheme g = build_grid_scheme(validate_problem(example1()));
    std::vector<double> v(g.size(), 1.0);
    EXPECT_DOUBLE_EQ(g.interpolate(v, 1.0), 1.0);
    EXPECT_EQ(code_of([&] { g.interpolate(v, 1e5); }), ErrorCode::OutOfDomain);
}

TEST(ValueIteration, FirstIteratesAreNoSwitchValues) {
    const auto p = validate_problem(example1());
    ValueIterationOptions o;
    o.keep_history = true;
    const IterationReport rep = value_iteration(p, build_grid_scheme(p), o);
    ASSERT_FALSE(rep.history.empty());
    const auto& [w0, y0] = rep.history.front();
    const NoSwitchValue g1 = no_switch_value(p, kOpen), g0 = no_switch_value(p, kClosed);
    for (double x : {0.1, 1.0, 5.0}) {
        EXPECT_NEAR(rep.grid.interpolate(w0, x), g1(x), 1e-3 * std::abs(g1(x)));
        EXPECT_NEAR(rep.grid.interpolate(y0, x), g0(x), 1e-12);
    }
}

TEST(ValueIteration, IteratesIncreaseMonotonically) {
    const auto p = validate_problem(example2());
    GridOptions g;
    g.nodes = 400;
    ValueIterationOptions o;
    o.keep_history = true;
    const IterationReport rep = value_iteration(p, build_grid_scheme(p, g), o);
    EXPECT_TRUE(rep.converged);
    EXPECT_TRUE(rep.monotone);
    for (std::size_t n = 1; n < rep.history.size(); ++n)
        for (std::size_t j = 0; j < rep.grid.size(); ++j) {
            EXPECT_GE(rep.history[n].first[j], rep.history[n - 1].first[j] - 1e-12 * (1.0 + std::abs(rep.history[n].first[j])));
            EXPECT_GE(rep.history[n].second[j], rep.history[n - 1].second[j] - 1e-12 * (1.0 + std::abs(rep.history[n].second[j])));
        }
}

TEST(ValueIteration, MatchesExampleOneSolution) {
    const auto p = validate_problem(example1());
    const Solution s = solve(p);
    const IterationReport rep = value_iteration(p, build_grid_scheme(p));
    ASSERT_TRUE(rep.converged);
    for (double x : {0.1, 0.183, 0.5, 1.0, 1.15, 2.0})
        for (int r = 0; r < 2; ++r) EXPECT_NEAR(rep.value(r, x), s.v(r, x), 1e-3 * std::abs(s.v(r, x))) << x;
}

TEST(ValueIteration, MatchesSelfConsistentExampleTwo) {
    const auto p = validate_problem(example2());
    SolveOptions so;
    so.coupling = Coupling::Anchored;
    const Solution s = solve(p, so);
    const IterationReport rep = value_iteration(p, build_grid_scheme(p));
    for (double x : {0.3, 0.8, 1.2, 1.7, 3.0})
        for (int r = 0; r < 2; ++r) EXPECT_NEAR(rep.value(r, x), s.v(r, x), 1e-3 * std::abs(s.v(r, x))) << x;
}

TEST(ValueIteration, ParallelSweepsAreBitIdentical) {
    const auto p = validate_problem(example2());
    GridOptions g;
    g.nodes = 500;
    const GridScheme grid = build_grid_scheme(p, g);
    ValueIterationOptions a, b;
    a.parallel = true;
    b.parallel = false;
    const IterationReport ra = value_iteration(p, grid, a), rb = value_iteration(p, grid, b);
    EXPECT_EQ(ra.iterations, rb.iterations);
    EXPECT_EQ(ra.w, rb.w);
    EXPECT_EQ(ra.y, rb.y);
}

TEST(ValueIteration, HugeCostsLeaveNoSwitchValues) {
    SwitchingProblem sp = example2();
    sp.cost_open = Cost{1e6};
    sp.cost_close = Cost{1e6};
    const auto p = validate_problem(sp);
    ValueIterationOptions o;
    o.keep_history = true;
    const IterationReport rep = value_iteration(p, build_grid_scheme(p), o);
    EXPECT_LE(rep.iterations, 2);
    EXPECT_EQ(rep.w, rep.history.front().first);
    EXPECT_EQ(rep.y, rep.history.front().second);
}

TEST(MonteCarlo, NeverSwitchingEstimatesNoSwitchValue) {
    const auto p = validate_problem(example1());
    const NoSwitchValue g1 = no_switch_value(p, kOpen);
    const SimulationEstimate e = simulate_policy(p, {}, 1.0, kOpen, small_run(20000));
    EXPECT_EQ(e.mean_switches, 0.0);
    EXPECT_TRUE(e.exact_transitions);
    EXPECT_LT(std::abs(e.z_score(g1(1.0))), 4.0) << e.mean << " vs " << g1(1.0);
}

TEST(MonteCarlo, OptimalPolicyMatchesSolution) {
    const auto p = validate_problem(example1());
    const Solution s = solve(p);
    for (int r = 0; r < 2; ++r) {
        const SimulationEstimate e = simulate_policy(p, {s.a_star, s.b_star}, 1.0, r, small_run(10000));
        EXPECT_LT(std::abs(e.z_score(s.v(r, 1.0))), 4.0) << "regime " << r << ": " << e.mean << " vs " << s.v(r, 1.0);
    }
}

TEST(MonteCarlo, PerturbedPolicyDoesNotBeatTheOptimum) {
    const auto p = validate_problem(example1());
    const Solution s = solve(p);
    for (const ThresholdPolicy& policy : {ThresholdPolicy{0.6 * *s.a_star, 1.5 * *s.b_star},
                                          ThresholdPolicy{1.5 * *s.a_star, 0.8 * *s.b_star}}) {
        const SimulationEstimate e = simulate_policy(p, policy, 1.0, kClosed, small_run(10000));
        EXPECT_LE(e.mean, s.v0(1.0) + 3.0 * e.std_error);
    }
}

TEST(MonteCarlo, ResultIndependentOfThreading) {
    const auto p = validate_problem(example2());
    const Solution s = solve(p);
    SimulationOptions a = small_run(3000), b = small_run(3000);
    a.parallel = true;
    b.parallel = false;
    const SimulationEstimate ea = simulate_policy(p, {s.a_star, s.b_star}, 1.0, kOpen, a);
    const SimulationEstimate eb = simulate_policy(p, {s.a_star, s.b_star}, 1.0, kOpen, b);
    EXPECT_EQ(ea.mean, eb.mean);
    EXPECT_EQ(ea.std_error, eb.std_error);
    EXPECT_EQ(ea.mean_switches, eb.mean_switches);
}

TEST(MonteCarlo, StepSkippingAgreesWithPlainStepping) {
    const auto p = validate_problem(example1());
    const Solution s = solve(p);
    SimulationOptions a = small_run(4000), b = small_run(4000);
    b.step_skipping = false;
    b.dt = 1e-2;
    const SimulationEstimate ea = simulate_policy(p, {s.a_star, s.b_star}, 0.8, kOpen, a);
    const SimulationEstimate eb = simulate_policy(p, {s.a_star, s.b_star}, 0.8, kOpen, b);
    EXPECT_LT(ea.mean_steps, eb.mean_steps);
    const double se = std::hypot(ea.std_error, eb.std_error);
    EXPECT_LT(std::abs(ea.mean - eb.mean), 4.0 * se);
}

TEST(MonteCarlo, AbsorptionEndsThePath) {
    // Started next to the absorbing endpoint, the open regime is stopped almost at once;
    // without absorption its no-switch value would be about -0.74. Hits are monitored on the
    // step grid, so paths that survive the first step bias the estimate by O(sqrt(dt)).
    const auto p = validate_problem(example2());
    const double g1 = no_switch_value(p, kOpen)(1e-8);
    EXPECT_LT(g1, -0.7);
    const SimulationEstimate coarse = simulate_policy(p, {}, 1e-8, kOpen, small_run(4000));
    EXPECT_LT(std::abs(coarse.mean), 0.1);
    SimulationOptions fine = small_run(4000);
    fine.dt = 1e-5;
    const SimulationEstimate e = simulate_policy(p, {}, 1e-8, kOpen, fine);
    EXPECT_LT(std::abs(e.mean), std::abs(coarse.mean));
}

TEST(MonteCarlo, InvalidArgumentsAreRejected) {
    const auto p = validate_problem(example1());
    EXPECT_EQ(code_of([&] { simulate_policy(p, {}, 1.0, kOpen, small_run(0)); }), ErrorCode::InvalidParameter);
    EXPECT_EQ(code_of([&] { simulate_policy(p, {}, -1.0, kOpen, small_run(10)); }), ErrorCode::OutOfDomain);
    EXPECT_EQ(code_of([&] { simulate_policy(p, {}, 1.0, 2, small_run(10)); }), ErrorCode::InvalidParameter);
    EXPECT_EQ(code_of([&] { simulate_policy(p, {2.0, 1.0}, 1.0, kOpen, small_run(10)); }), ErrorCode::InvalidParameter);
}
