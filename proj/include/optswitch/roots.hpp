#pragma once

#include <functional>
#include <utility>

namespace optswitch {

struct RootOptions {
    double x_tol = 1e-14;   ///< relative bracket width at which to stop
    double f_tol = 0.0;     ///< absolute residual at which to stop
    int max_iter = 200;
};

struct RootResult {
    double x = 0.0;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Function returning (value, derivative)
using ValueAndSlope = std::function<std::pair<double, double>(double)>;

/// Safeguarded Newton iteration inside [lo, hi]; falls back to bisection whenever
/// the Newton step leaves the bracket or fails to halve the residual.
/// Throws BracketFailure when f(lo) and f(hi) do not differ in sign.
RootResult newton_bisect(const ValueAndSlope& f, double lo, double hi, const RootOptions& opts = {});

/// Bisection-only variant for functions without a derivative
RootResult bisect(const std::function<double(double)>& f, double lo, double hi, const RootOptions& opts = {});

}  // namespace optswitch
