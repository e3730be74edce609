#include "optswitch/error.hpp"
#include "optswitch/specialfn.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace optswitch;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Hermite, MinusOneMatchesErfcForm) {
    // 𝓗_{-1}(z) = e^{z²}(√π/2) erfc(z)
    for (double z : {-3.0, -1.0, 0.0, 0.5, 2.0, 7.0}) {
        const double expected = std::exp(z * z) * std::sqrt(std::numbers::pi) / 2.0 * std::erfc(z);
        EXPECT_LT(rel(hermite(-1.0, z), expected), 1e-10) << "z=" << z;
    }
    EXPECT_NEAR(hermite(-1.0, 0.0), 0.8862269255, 1e-10);
}

TEST(Hermite, CentralValue) {
    for (double nu : {-0.3, -1.0, -2.1, -5.5, -9.7}) {
        const double expected = std::pow(2.0, nu) * std::sqrt(std::numbers::pi) / std::tgamma((1.0 - nu) / 2.0);
        EXPECT_LT(rel(hermite(nu, 0.0), expected), 1e-10) << "nu=" << nu;
    }
}

TEST(Hermite, ReferenceValues) {
    // high-precision reference values from an independent arbitrary-precision library
    struct Case { double nu, z, value; };
    const Case cases[] = {
        {-2.1, 1.0, 0.10722169750218580113},
        {-0.5, -3.0, 4792.2481457265090116},
        {-7.3, 15.0, 1.54287322207504937e-11},
        {-2.1, -20.0, 2.3866965562420853505e+175},
        {-0.3, 0.7, 0.82020433342898580819},
        {-9.9, -12.0, 9.5762793261746130021e+66},
        {-2.1, 20.0, 0.00043044222537168717246},
    };
    for (const auto& c : cases) EXPECT_LT(rel(hermite(c.nu, c.z), c.value), 1e-10) << c.nu << " " << c.z;
}

TEST(Hermite, DecreasingInArgument) {
    EXPECT_LT(hermite(-1.0, 10.0), hermite(-1.0, 0.0));
}

TEST(Hermite, PositiveEverywhere) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> nu_d(-10.0, -0.05), z_d(-20.0, 20.0);
    for (int i = 0; i < 200; ++i) {
        const double nu = nu_d(rng), z = z_d(rng);
        EXPECT_GT(hermite(nu, z), 0.0) << nu << " " << z;
    }
}

TEST(Hermite, RejectsNonNegativeDegree) {
    EXPECT_THROW(hermite(0.0, 1.0), Error);
    try {
        hermite(0.5, 1.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegreeOutOfRange);
    }
}

TEST(HermiteDerivative, MatchesFiniteDifference) {
    const double h = 1e-5;
    const std::pair<double, double> pts[] = {{-1.0, 0.0}, {-2.1, 1.0}, {-0.4, -2.0}, {-3.3, 4.0}, {-5.0, -6.0},
                                             {-0.9, 0.3}, {-7.5, 2.5}, {-1.5, -0.5}, {-2.7, 8.0}, {-4.2, -3.1}};
    for (auto [nu, z] : pts) {
        const double fd = (hermite(nu, z + h) - hermite(nu, z - h)) / (2.0 * h);
        EXPECT_LT(rel(hermite_derivative(nu, z), fd), 1e-6) << nu << " " << z;
    }
    EXPECT_DOUBLE_EQ(hermite_derivative(-1.0, 0.0), -2.0 * hermite(-2.0, 0.0));
}

TEST(HermiteDerivative, NegativeSign) {
    for (double z : {-5.0, 0.0, 5.0}) EXPECT_LT(hermite_derivative(-1.3, z), 0.0);
}

TEST(ParabolicCylinder, CentralValue) {
    const double nu = -2.1;
    const double expected = std::pow(2.0, nu / 2.0) * std::sqrt(std::numbers::pi) / std::tgamma((1.0 - nu) / 2.0);
    EXPECT_LT(rel(parabolic_cylinder(nu, 0.0), expected), 1e-9);
    EXPECT_LT(rel(parabolic_cylinder(nu, 0.0), 0.96306588605792574809), 1e-9);
}

TEST(ParabolicCylinder, DecaysToZero) {
    const double d5 = parabolic_cylinder(-1.5, 5.0), d10 = parabolic_cylinder(-1.5, 10.0),
                 d20 = parabolic_cylinder(-1.5, 20.0);
    EXPECT_GT(d5, d10);
    EXPECT_GT(d10, d20);
    EXPECT_GT(d20, 0.0);
    EXPECT_LT(d20, 1e-40);
}

TEST(ParabolicCylinder, MatchesDirectIntegral) {
    // D_ν(z) = e^{-z²/4} Γ(−ν)⁻¹ ∫₀^∞ t^{−ν−1} e^{−t²/2 − zt} dt, integrated independently
    boost::math::quadrature::exp_sinh<double> integrator;
    auto direct = [&](double nu, double z) {
        auto f = [&](double t) { return std::pow(t, -nu - 1.0) * std::exp(-0.5 * t * t - z * t); };
        return std::exp(-0.25 * z * z) * integrator.integrate(f) / std::tgamma(-nu);
    };
    EXPECT_LT(rel(parabolic_cylinder(-1.0, 1.0), direct(-1.0, 1.0)), 1e-9);
    EXPECT_LT(rel(parabolic_cylinder(-1.0, 1.0),
                  std::exp(-0.25) * std::sqrt(2.0) * hermite(-1.0, 1.0 / std::sqrt(2.0))),
              1e-12);
    EXPECT_LT(rel(parabolic_cylinder(-1.0, 1.0), 0.5106437410796606749), 1e-9);
    EXPECT_LT(rel(parabolic_cylinder(-3.5, -4.0), 1471.5722231974792392), 1e-9);
    EXPECT_LT(rel(parabolic_cylinder(-2.6, 2.2), direct(-2.6, 2.2)), 1e-9);
}

TEST(ParabolicCylinder, DefinitionalIdentity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> nu_d(-5.0, -0.1), z_d(-15.0, 15.0);
    for (int i = 0; i < 20; ++i) {
        const double nu = nu_d(rng), z = z_d(rng);
        const double expected = std::pow(2.0, -nu / 2.0) * std::exp(-z * z / 4.0) * hermite(nu, z / std::numbers::sqrt2);
        EXPECT_LT(rel(parabolic_cylinder(nu, z), expected), 1e-12) << nu << " " << z;
    }
}
