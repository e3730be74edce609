#include "optswitch/roots.hpp"

#include "optswitch/error.hpp"

#include <cmath>
#include <sstream>

namespace optswitch {

namespace {

[[noreturn]] void bracket_failure(double lo, double hi, double flo, double fhi) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]: f=" << flo << ", " << fhi;
    throw Error(ErrorCode::BracketFailure, "bracket", os.str());
}

bool small_bracket(double lo, double hi, double tol) {
    return std::abs(hi - lo) <= tol * std::max(1e-300, std::max(std::abs(lo), std::abs(hi)));
}

}  // namespace

RootResult newton_bisect(const ValueAndSlope& f, double lo, double hi, const RootOptions& opts) {
    auto [flo, dlo] = f(lo);
    auto [fhi, dhi] = f(hi);
    RootResult r;
    if (flo == 0.0) return {lo, 0.0, 0, true};
    if (fhi == 0.0) return {hi, 0.0, 0, true};
    if (std::signbit(flo) == std::signbit(fhi)) bracket_failure(lo, hi, flo, fhi);
    if (flo > 0.0) std::swap(lo, hi);  // keep f(lo) < 0 < f(hi)

    double x = 0.5 * (lo + hi);
    double prev_abs = HUGE_VAL;
    for (int it = 1; it <= opts.max_iter; ++it) {
        auto [fx, dx] = f(x);
        r = {x, fx, it, false};
        if (fx == 0.0 || std::abs(fx) <= opts.f_tol) {
            r.converged = true;
            return r;
        }
        if (fx < 0.0) lo = x; else hi = x;
        if (small_bracket(lo, hi, opts.x_tol)) {
            r.converged = true;
            return r;
        }
        double next = x - fx / dx;
        const double a = std::min(lo, hi), b = std::max(lo, hi);
        const bool inside = std::isfinite(next) && next > a && next < b;
        if (!inside || std::abs(fx) > 0.5 * prev_abs) next = 0.5 * (lo + hi);
        prev_abs = std::abs(fx);
        if (next == x) {
            r.converged = true;
            return r;
        }
        x = next;
    }
    return r;
}

RootResult bisect(const std::function<double(double)>& f, double lo, double hi, const RootOptions& opts) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0, true};
    if (fhi == 0.0) return {hi, 0.0, 0, true};
    if (std::signbit(flo) == std::signbit(fhi)) bracket_failure(lo, hi, flo, fhi);
    if (flo > 0.0) std::swap(lo, hi);
    RootResult r;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double x = 0.5 * (lo + hi);
        const double fx = f(x);
        r = {x, fx, it, false};
        if (fx == 0.0 || std::abs(fx) <= opts.f_tol) {
            r.converged = true;
            break;
        }
        if (fx < 0.0) lo = x; else hi = x;
        if (small_bracket(lo, hi, opts.x_tol)) {
            r.converged = true;
            break;
        }
    }
    return r;
}

}  // namespace optswitch
