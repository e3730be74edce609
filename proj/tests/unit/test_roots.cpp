#include "optswitch/error.hpp"
#include "optswitch/roots.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace optswitch;

TEST(NewtonBisect, FindsCubicRoot) {
    auto f = [](double x) { return std::pair{x * x * x - 2.0, 3.0 * x * x}; };
    auto r = newton_bisect(f, 0.0, 3.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x, std::cbrt(2.0), 1e-14);
}

TEST(NewtonBisect, SurvivesBadDerivative) {
    // derivative deliberately wrong by a factor of 100: bisection safeguard still converges
    auto f = [](double x) { return std::pair{std::atan(x - 0.3), 0.01}; };
    auto r = newton_bisect(f, -10.0, 10.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x, 0.3, 1e-13);
}

TEST(NewtonBisect, DecreasingFunction) {
    auto f = [](double x) { return std::pair{std::exp(-x) - 0.5, -std::exp(-x)}; };
    EXPECT_NEAR(newton_bisect(f, 0.0, 5.0).x, std::log(2.0), 1e-14);
}

TEST(NewtonBisect, NoSignChangeThrows) {
    auto f = [](double x) { return std::pair{x * x + 1.0, 2.0 * x}; };
    try {
        newton_bisect(f, -1.0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BracketFailure);
    }
}

TEST(Bisect, Converges) {
    auto r = bisect([](double x) { return std::cos(x); }, 0.0, 3.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x, M_PI / 2, 1e-14);
}
