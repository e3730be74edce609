#include "optswitch/specialfn.hpp"

#include "optswitch/error.hpp"
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace optswitch {

namespace {

constexpr double kRelTol = 1e-13;
constexpr double kAcceptTol = 1e-10;

/// Integral estimate with the absolute error of the last refinement
struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
QuadResult finite_part(F&& f, double a, double b) {
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    QuadResult r;
    r.value = rule.integrate(f, a, b, kRelTol, &r.error);
    return r;
}

template <class F>
QuadResult tail_part(F&& f, double a) {
    thread_local boost::math::quadrature::exp_sinh<double> rule;
    QuadResult r;
    r.value = rule.integrate(f, a, std::numeric_limits<double>::infinity(), kRelTol, &r.error);
    return r;
}

void check_degree(double nu) {
    if (!(nu < 0.0) || !std::isfinite(nu)) {
        std::ostringstream os;
        os << "degree must be negative, got " << nu;
        throw Error(ErrorCode::DegreeOutOfRange, "nu", os.str());
    }
}

}  // namespace

double log_hermite(double nu, double z) {
    check_degree(nu);
    const double p = -nu - 1.0;  // exponent of t in the integrand
    auto h = [&](double t) { return -t * t - 2.0 * t * z + p * std::log(t); };

    // Peak of the log-integrand, if it has an interior maximum
    double t_peak = -1.0;
    const double disc = z * z + 2.0 * p;
    if (disc >= 0.0) {
        const double cand = 0.5 * (-z + std::sqrt(disc));
        if (cand > 0.0 && p >= 0.0) t_peak = cand;
    }
    if (t_peak < 0.0 && z < 0.0) t_peak = -z;
    const double shift = t_peak > 0.0 ? h(t_peak) : 0.0;
    auto integrand = [&](double t) {
        if (!(t > 0.0)) return 0.0;
        return std::exp(h(t) - shift);
    };

    const double t1 = std::max(1.0, std::abs(nu));
    double t2 = t1;
    if (t_peak > 0.0) {
        const double width = 1.0 / std::sqrt(2.0 + std::max(p, 0.0) / (t_peak * t_peak));
        t2 = std::max(t1, t_peak + 12.0 * width);
    }

    double total = 0.0, err = 0.0;
    bool ok = true;
    auto add = [&](const QuadResult& r) {
        total += r.value;
        err += r.error;
        ok = ok && r.error <= kRelTol * std::abs(r.value);
    };
    if (p < 0.0) {
        // u = t^{p+1} removes the t^p singularity at the origin
        const double q = p + 1.0;
        auto smooth = [&](double u) {
            if (!(u > 0.0)) return 0.0;
            const double t = std::pow(u, 1.0 / q);
            return std::exp(-t * t - 2.0 * t * z - shift) / q;
        };
        add(finite_part(smooth, 0.0, std::pow(t1, q)));
    } else {
        add(finite_part(integrand, 0.0, t1));
    }
    if (t2 > t1) add(finite_part(integrand, t1, t2));
    add(tail_part(integrand, t2));

    if (!(total > 0.0) || !std::isfinite(total) || (!ok && err > kAcceptTol * total)) {
        std::ostringstream os;
        os << "nu=" << nu << " z=" << z << " estimate=" << total << " error=" << err;
        throw Error(ErrorCode::QuadratureNonConvergence, "hermite", os.str());
    }
    return shift + std::log(total) - std::lgamma(-nu);
}

double hermite(double nu, double z) { return std::exp(log_hermite(nu, z)); }

double hermite_derivative(double nu, double z) { return 2.0 * nu * hermite(nu - 1.0, z); }

double parabolic_cylinder(double nu, double z) {
    const double lh = log_hermite(nu, z / std::numbers::sqrt2);
    return std::exp(-0.5 * nu * std::numbers::ln2 - 0.25 * z * z + lh);
}

}  // namespace optswitch
