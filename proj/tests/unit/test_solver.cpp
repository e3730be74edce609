#include "invariants.hpp"
#include "optswitch/error.hpp"
#include "optswitch/solver.hpp"
#include "test_problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace optswitch;
using testing_problems::example1;
using testing_problems::example2;

namespace {

void expect_rel(double actual, double expected, double tol, const char* what) {
    EXPECT_LE(std::abs(actual / expected - 1.0), tol) << what << ": " << actual << " vs " << expected;
}

void expect_suite_passes(const ValidatedProblem& p, const SolveOptions& opts) {
    for (const auto& c : invariants::run_suite(p, opts)) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}

SolveOptions anchored() {
    SolveOptions o;
    o.coupling = Coupling::Anchored;
    return o;
}

}  // namespace

TEST(Solver, ExampleOneGolden) {
    const Solution s = solve(validate_problem(example1()));
    ASSERT_EQ(s.outcome, Outcome::Switching);
    expect_rel(*s.a_star, 0.18300, 1e-3, "a*");
    expect_rel(*s.b_star, 1.15042, 1e-3, "b*");
    expect_rel(s.beta0_star, 10.8125, 1e-3, "beta0*");
    expect_rel(s.beta1_star, -0.695324, 1e-3, "beta1*");
    EXPECT_LT(s.residual, 1e-8);
    EXPECT_EQ(s.limits.l_c.kind, LimitKind::Zero);
    EXPECT_EQ(s.limits.l_d.kind, LimitKind::Zero);
}

TEST(Solver, ExampleTwoGolden) {
    const Solution s = solve(validate_problem(example2()));
    ASSERT_EQ(s.outcome, Outcome::Switching);
    expect_rel(*s.a_star, 0.781797, 1e-4, "a*");
    expect_rel(*s.b_star, 1.66182, 1e-4, "b*");
    expect_rel(s.beta0_star, 144.313, 1e-4, "beta0*");
    expect_rel(s.beta1_star, -2.16941, 1e-4, "beta1*");
}

TEST(Solver, ExampleTwoAnchoredCoupling) {
    const Solution s = solve(validate_problem(example2()), anchored());
    expect_rel(*s.a_star, 0.872634, 1e-5, "a*");
    expect_rel(*s.b_star, 1.718648, 1e-5, "b*");
    expect_rel(s.beta0_star, 142.96129, 1e-5, "beta0*");
    expect_rel(s.beta1_star, -1.9480833, 1e-5, "beta1*");
}

TEST(Solver, NaturalEndpointsMakeCouplingsCoincide) {
    const auto p = validate_problem(example1());
    const Solution a = solve(p), b = solve(p, anchored());
    EXPECT_NEAR(*a.a_star, *b.a_star, 1e-12);
    EXPECT_NEAR(*a.b_star, *b.b_star, 1e-12);
}

TEST(Solver, SimultaneousAgreesWithFixedPoint) {
    for (const auto& [problem, tol] : {std::pair{example1(), 1e-8}, std::pair{example2(), 1e-6}}) {
        const auto p = validate_problem(problem);
        const Solution f = solve(p), n = solve_simultaneous(p);
        EXPECT_EQ(n.method, "simultaneous-newton");
        expect_rel(*n.a_star, *f.a_star, tol, "a*");
        expect_rel(*n.b_star, *f.b_star, tol, "b*");
        expect_rel(n.beta0_star, f.beta0_star, tol, "beta0*");
        expect_rel(n.beta1_star, f.beta1_star, tol, "beta1*");
    }
}

TEST(Solver, FixedPointTraceConverges) {
    const Solution s = solve(validate_problem(example1()));
    ASSERT_GE(s.beta1_trace.size(), 2u);
    EXPECT_EQ(s.iterations, static_cast<int>(s.beta1_trace.size()));
    EXPECT_NEAR(s.beta1_trace.back(), s.beta1_star, 1e-9);
}

TEST(Solver, InitialSlopeDoesNotChangeTheFixedPoint) {
    const auto p = validate_problem(example1());
    SolveOptions o;
    o.initial_beta1 = -0.3;
    const Solution a = solve(p), b = solve(p, o);
    EXPECT_NEAR(*a.a_star, *b.a_star, 1e-8);
    EXPECT_NEAR(*a.b_star, *b.b_star, 1e-8);
}

TEST(Solver, ValueFunctionsOnSwitchingRegions) {
    const Solution s = solve(validate_problem(example1()));
    const double a = *s.a_star, b = *s.b_star;
    // Below a*, the open firm closes at once; above b*, the closed firm opens at once
    EXPECT_NEAR(s.v1(0.5 * a), s.v0(0.5 * a) - 2.0, 1e-12);
    EXPECT_NEAR(s.v0(2.0 * b), s.v1(2.0 * b) - 2.0, 1e-12);
    // Continuation values are the no-switch value plus the fundamental part
    const double x = 0.5 * (a + b);
    EXPECT_NEAR(s.v0(x), s.g(kClosed, x) + s.beta0_star * s.model->fund[kClosed].psi(x).v, 1e-10);
    EXPECT_NEAR(s.v1(x), s.g(kOpen, x) - s.beta1_star * s.model->fund[kOpen].phi(x).v, 1e-10);
}

TEST(Solver, OutOfDomainEvaluation) {
    const Solution s = solve(validate_problem(example2()));
    EXPECT_THROW(s.v0(-0.5), Error);
    EXPECT_EQ(s.v0(0.0), 0.0);  // absorbing endpoint, no reward in the closed regime
}

TEST(Solver, HugeCostsMeanNoSwitchEverywhere) {
    SwitchingProblem p = example2();
    p.cost_open = Cost{1e6};
    p.cost_close = Cost{1e6};
    const Solution s = solve(validate_problem(p));
    EXPECT_EQ(s.outcome, Outcome::NoSwitchEverywhere);
    EXPECT_FALSE(s.a_star.has_value());
    EXPECT_FALSE(s.b_star.has_value());
    for (double x : {0.3, 1.0, 4.0})
        for (int r = 0; r < 2; ++r) EXPECT_EQ(s.v(r, x), s.g(r, x));
}

TEST(Solver, FastGrowingRewardIsInfinite) {
    SwitchingProblem p = example1();
    p.regimes[kClosed].family = GeometricBM{0.0, 0.15};
    p.regimes[kOpen].family = GeometricBM{0.0, 0.25};
    p.reward[kClosed] = Reward{0.0, 0.0, 1.0, 2.2};
    try {
        solve(validate_problem(p));
        FAIL() << "expected InfiniteValue";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InfiniteValue);
        EXPECT_EQ(e.field(), "l_d");
    }
}

TEST(Solver, ThresholdOrderingAndSigns) {
    for (const auto& problem : {example1(), example2()}) {
        const Solution s = solve(validate_problem(problem));
        EXPECT_TRUE(invariants::ordering_and_signs(s).pass);
        const auto d = invariants::dominance(s);
        EXPECT_TRUE(d.pass) << d.detail;
    }
}

TEST(Solver, InvariantSuiteExampleOne) { expect_suite_passes(validate_problem(example1()), {}); }

TEST(Solver, InvariantSuiteExampleTwo) {
    expect_suite_passes(validate_problem(example2()), {});
    expect_suite_passes(validate_problem(example2()), anchored());
}

TEST(Solver, InvariantSuiteRandomDraws) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 3; ++k) expect_suite_passes(validate_problem(testing_problems::random_gbm(rng)), {});
    for (int k = 0; k < 3; ++k) expect_suite_passes(validate_problem(testing_problems::random_ou(rng)), anchored());
}

TEST(Solver, InvariantCheckersDetectViolations) {
    // Shift β₀ off the tangency: smooth fit and the generator identities no longer hold together
    Solution s = solve(validate_problem(example1()));
    s.w0_line.slope *= 1.01;
    s.w0_line.intercept = s.w0_line.anchor_R - s.w0_line.slope * s.w0_line.anchor_y;
    EXPECT_FALSE(invariants::majorant_and_smooth_fit(s).pass);
}
