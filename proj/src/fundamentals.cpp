#include "optswitch/fundamentals.hpp"

#include "optswitch/error.hpp"
#include "optswitch/roots.hpp"
#include "optswitch/specialfn.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace optswitch {

struct Fundamentals::Impl {
    int regime = 0;
    RegimeSpec spec;
    double alpha = 0.0;
    Endpoint lower, upper;
    double lo = 0.0, hi = 0.0;
    ClosedForm closed;

    virtual ~Impl() = default;
    virtual Jet psi(double x) const = 0;
    virtual Jet phi(double x) const = 0;
    virtual std::pair<Jet, Jet> both(double x) const { return {psi(x), phi(x)}; }

    virtual double F_inverse(double y) const { return invert(y, true); }
    virtual double G_inverse(double y) const { return invert(y, false); }

    /// Second derivative implied by (𝒜 − α)u = 0
    double ode_d2(double x, double v, double d1) const {
        const double s = spec.vol(x);
        return 2.0 * (alpha * v - spec.drift(x) * d1) / (s * s);
    }

    void check_domain(double x) const {
        if (!(x >= lo && x <= hi)) {
            std::ostringstream os;
            os << "state " << x << " outside [" << lo << ", " << hi << "]";
            throw Error(ErrorCode::OutOfDomain, "x", os.str());
        }
    }

    /// Numerical inverse on log F (or log(−G) = −log F), monotone in x
    double invert(double y, bool forward) const {
        const double target = forward ? std::log(y) : -std::log(-y);
        if (!std::isfinite(target))
            throw Error(ErrorCode::OutOfDomain, forward ? "F_inverse" : "G_inverse", "coordinate outside transform range");
        auto logF = [&](double x) {
            auto [p, q] = both(x);
            return std::pair{std::log(p.v) - std::log(q.v) - target, p.d1 / p.v - q.d1 / q.v};
        };
        const double flo = logF(lo).first, fhi = logF(hi).first;
        if (flo > 0.0 || fhi < 0.0) {
            std::ostringstream os;
            os << "coordinate " << y << " outside the transform range on [" << lo << ", " << hi << "]";
            throw Error(ErrorCode::OutOfDomain, forward ? "F_inverse" : "G_inverse", os.str());
        }
        return newton_bisect(logF, lo, hi, {1e-15, 0.0, 300}).x;
    }
};

namespace {

using Impl = Fundamentals::Impl;

struct GbmImpl final : Impl {
    GbmExponents e;

    static Jet power(double x, double n) {
        const double v = std::pow(x, n);
        return {v, n * v / x, n * (n - 1.0) * v / (x * x)};
    }
    Jet psi(double x) const override { check_domain(x); return power(x, e.nu_plus); }
    Jet phi(double x) const override { check_domain(x); return power(x, e.nu_minus); }
    double F_inverse(double y) const override {
        if (!(y > 0.0)) throw Error(ErrorCode::OutOfDomain, "F_inverse", "F takes positive values");
        return std::pow(y, 1.0 / (e.nu_plus - e.nu_minus));
    }
    double G_inverse(double y) const override {
        if (!(y < 0.0)) throw Error(ErrorCode::OutOfDomain, "G_inverse", "G takes negative values");
        return std::pow(-y, 1.0 / (e.nu_minus - e.nu_plus));
    }
};

struct OuImpl final : Impl {
    OuCylinder c;
    double pref = 1.0;

    Jet eval(double x, double sign) const {
        check_domain(x);
        const double z = sign * c.scale * (x - c.center);
        const double v = pref * hermite(c.nu, z);
        const double d1 = pref * hermite_derivative(c.nu, z) * sign * c.scale;
        return {v, d1, ode_d2(x, v, d1)};
    }
    Jet psi(double x) const override { return eval(x, -1.0); }
    Jet phi(double x) const override { return eval(x, 1.0); }
};

/// Fundamentals of a custom regime from the Riccati equation for w = u′/u,
/// w′ = −w² − (2μ/σ²)w + 2α/σ², integrated in each solution's stable direction
struct NumericImpl final : Impl {
    std::vector<double> xs;
    std::array<std::vector<double>, 2> logu, w, dw;  // 0: ψ, 1: φ

    double riccati(double x, double wv) const {
        const double s = spec.vol(x);
        const double s2 = s * s;
        return -wv * wv - 2.0 * spec.drift(x) / s2 * wv + 2.0 * alpha / s2;
    }

    /// Root of the frozen quadratic w² + (2μ/σ²)w − 2α/σ² = 0
    double frozen_root(double x, bool increasing) const {
        const double s = spec.vol(x);
        const double b = 2.0 * spec.drift(x) / (s * s), c = 2.0 * alpha / (s * s);
        const double disc = std::sqrt(b * b + 4.0 * c);
        return increasing ? 0.5 * (-b + disc) : 0.5 * (-b - disc);
    }

    void integrate(int which, double tol) {
        namespace odeint = boost::numeric::odeint;
        using State = std::array<double, 2>;
        const std::size_t n = xs.size();
        logu[which].assign(n, 0.0);
        w[which].assign(n, 0.0);
        dw[which].assign(n, 0.0);
        auto rhs = [&](const State& s, State& ds, double x) {
            ds[0] = riccati(x, s[0]);
            ds[1] = s[0];
        };
        auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
        std::vector<double> times(xs);
        if (which == 1) std::reverse(times.begin(), times.end());
        State s{frozen_root(times.front(), which == 0), 0.0};
        std::size_t k = 0;
        auto observer = [&](const State& st, double) {
            const std::size_t idx = which == 0 ? k : n - 1 - k;
            w[which][idx] = st[0];
            logu[which][idx] = st[1];
            ++k;
        };
        const double h0 = (times[1] - times[0]) * 0.1;
        odeint::integrate_times(stepper, rhs, s, times.begin(), times.end(), h0, observer);
        if (k != n) throw Error(ErrorCode::UnsupportedRegime, "custom", "fundamental-solution integration did not complete");
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(w[which][i]) || !std::isfinite(logu[which][i]))
                throw Error(ErrorCode::UnsupportedRegime, "custom", "fundamental-solution integration diverged");
            dw[which][i] = riccati(xs[i], w[which][i]);
        }
        const double mid = 0.5 * (xs.front() + xs.back());
        const double shift = interp_log(which, mid).v;
        for (auto& v : logu[which]) v -= shift;
    }

    /// Quintic Hermite interpolation of log u with the node jets (log u, w, w′)
    Jet interp_log(int which, double x) const {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = it == xs.begin() ? 0 : std::min<std::size_t>(it - xs.begin() - 1, xs.size() - 2);
        const double x0 = xs[i], h = xs[i + 1] - x0, t = (x - x0) / h;
        const double p0 = logu[which][i], p1 = logu[which][i + 1];
        const double m0 = w[which][i] * h, m1 = w[which][i + 1] * h;
        const double a0 = dw[which][i] * h * h, a1 = dw[which][i + 1] * h * h;
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        const double H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5), H3 = 0.5 * (t3 - 2 * t4 + t5);
        const double H4 = -4 * t3 + 7 * t4 - 3 * t5, H5 = 10 * t3 - 15 * t4 + 6 * t5;
        const double dH0 = -30 * t2 + 60 * t3 - 30 * t4, dH1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
        const double dH2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4), dH3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
        const double dH4 = -12 * t2 + 28 * t3 - 15 * t4, dH5 = 30 * t2 - 60 * t3 + 30 * t4;
        const double v = p0 * H0 + m0 * H1 + a0 * H2 + a1 * H3 + m1 * H4 + p1 * H5;
        const double d = (p0 * dH0 + m0 * dH1 + a0 * dH2 + a1 * dH3 + m1 * dH4 + p1 * dH5) / h;
        return {v, d, 0.0};
    }

    Jet eval(int which, double x) const {
        check_domain(x);
        const Jet l = interp_log(which, x);
        const double v = std::exp(l.v), d1 = v * l.d1;
        return {v, d1, ode_d2(x, v, d1)};
    }
    Jet psi(double x) const override { return eval(0, x); }
    Jet phi(double x) const override { return eval(1, x); }
};

}  // namespace

GbmExponents gbm_exponents(double drift, double vol, double discount) {
    const double s2 = vol * vol;
    const double b = drift - 0.5 * s2;
    const double disc = std::sqrt(b * b + 2.0 * discount * s2);
    return {(-b + disc) / s2, (-b - disc) / s2};
}

Fundamentals build_fundamentals(const ValidatedProblem& vp, int regime, const NumericFundamentalsOptions& opts) {
    if (regime != 0 && regime != 1) throw Error(ErrorCode::InvalidParameter, "regime", "regime index must be 0 or 1");
    const SwitchingProblem& p = vp.problem();
    const RegimeSpec& spec = p.regimes[regime];
    std::shared_ptr<Impl> impl;

    if (const auto* g = std::get_if<GeometricBM>(&spec.family)) {
        auto gi = std::make_shared<GbmImpl>();
        gi->e = gbm_exponents(g->drift, g->vol, p.discount);
        const double decades = 280.0 / (gi->e.nu_plus - gi->e.nu_minus);
        gi->lo = std::max(p.lower.x, std::pow(10.0, -decades));
        gi->hi = std::min(p.upper.x, std::pow(10.0, decades));
        gi->closed = gi->e;
        impl = gi;
    } else if (const auto* o = std::get_if<OrnsteinUhlenbeck>(&spec.family)) {
        auto oi = std::make_shared<OuImpl>();
        oi->c = {-p.discount / o->speed, o->level, std::sqrt(o->speed) / o->vol};
        oi->pref = std::exp(-0.5 * oi->c.nu * std::numbers::ln2);
        const double reach = 20.0 / oi->c.scale;
        oi->lo = std::max(p.lower.x, o->level - reach);
        oi->hi = std::min(p.upper.x, o->level + reach);
        oi->closed = oi->c;
        impl = oi;
    } else {
        auto ni = std::make_shared<NumericImpl>();
        ni->spec = spec;
        ni->alpha = p.discount;
        const double lo = p.window ? p.window->first : p.lower.x;
        const double hi = p.window ? p.window->second : p.upper.x;
        ni->lo = lo;
        ni->hi = hi;
        const int n = std::max(opts.nodes, 16);
        ni->xs.resize(n);
        const bool geometric = lo > 0.0 && hi / lo > 100.0;
        for (int k = 0; k < n; ++k) {
            const double t = double(k) / (n - 1);
            ni->xs[k] = geometric ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
        }
        ni->xs.back() = hi;
        ni->integrate(0, opts.tolerance);
        ni->integrate(1, opts.tolerance);
        impl = ni;
    }
    impl->regime = regime;
    impl->spec = spec;
    impl->alpha = p.discount;
    impl->lower = p.lower;
    impl->upper = p.upper;
    if (!(impl->lo < impl->hi)) throw Error(ErrorCode::BadInterval, "interval", "empty computational range");
    return Fundamentals(impl);
}

int Fundamentals::regime() const { return impl_->regime; }
const ClosedForm& Fundamentals::closed_form() const { return impl_->closed; }
const RegimeSpec& Fundamentals::spec() const { return impl_->spec; }
double Fundamentals::discount() const { return impl_->alpha; }
std::pair<double, double> Fundamentals::range() const { return {impl_->lo, impl_->hi}; }
Jet Fundamentals::psi(double x) const { return impl_->psi(x); }
Jet Fundamentals::phi(double x) const { return impl_->phi(x); }
std::pair<Jet, Jet> Fundamentals::both(double x) const { return impl_->both(x); }

double Fundamentals::F(double x) const {
    auto [p, q] = both(x);
    return p.v / q.v;
}
double Fundamentals::G(double x) const {
    auto [p, q] = both(x);
    return -q.v / p.v;
}
double Fundamentals::dF(double x) const {
    auto [p, q] = both(x);
    return (p.d1 * q.v - p.v * q.d1) / (q.v * q.v);
}
double Fundamentals::dG(double x) const {
    auto [p, q] = both(x);
    return (p.d1 * q.v - p.v * q.d1) / (p.v * p.v);
}
double Fundamentals::F_inverse(double y) const { return impl_->F_inverse(y); }
double Fundamentals::G_inverse(double y) const { return impl_->G_inverse(y); }

double Fundamentals::F_at_lower() const {
    return impl_->lower.kind == BoundaryKind::Natural ? 0.0 : F(impl_->lower.x);
}
double Fundamentals::G_at_upper() const {
    return impl_->upper.kind == BoundaryKind::Natural ? 0.0 : G(impl_->upper.x);
}

std::pair<double, double> computational_window(const ValidatedProblem& problem, const Fundamentals& f0,
                                               const Fundamentals& f1) {
    double lo = std::max(f0.range().first, f1.range().first);
    double hi = std::min(f0.range().second, f1.range().second);
    if (problem->window) {
        lo = std::max(lo, problem->window->first);
        hi = std::min(hi, problem->window->second);
    }
    if (!(lo < hi)) throw Error(ErrorCode::BadInterval, "window", "regimes share no computational window");
    return {lo, hi};
}

}  // namespace optswitch
