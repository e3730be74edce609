#include "optswitch/noswitch.hpp"

#include "optswitch/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace optswitch {

namespace {

using GL = boost::math::quadrature::gauss<double, 8>;

/// Gauss–Legendre nodes and weights on [a, b]
template <class F>
void for_each_node(double a, double b, F&& f) {
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0.0) {
            f(c, h * ws[i]);
        } else {
            f(c - h * xs[i], h * ws[i]);
            f(c + h * xs[i], h * ws[i]);
        }
    }
}

NoSwitchValue gbm_closed(int regime, const GeometricBM& g, const Reward& r, double alpha) {
    const double lin = alpha - g.drift;
    const double p = r.power_exp;
    const double kp = alpha - p * g.drift - 0.5 * g.vol * g.vol * p * (p - 1.0);
    if (r.linear != 0.0 && !(lin > 0.0))
        throw Error(ErrorCode::ResolventDivergence, "reward_linear", "linear reward grows faster than discounting");
    if (r.power_coef != 0.0 && !(kp > 0.0)) {
        std::ostringstream os;
        os << "power reward exponent " << p << " outside the integrable range";
        throw Error(ErrorCode::ResolventDivergence, "reward_power_exp", os.str());
    }
    const double c0 = r.constant / alpha, c1 = r.linear / lin, cp = r.power_coef != 0.0 ? r.power_coef / kp : 0.0;
    return NoSwitchValue(regime, "gbm-closed-form", [=](double x) {
        Jet j{c0 + c1 * x, c1, 0.0};
        if (cp != 0.0) {
            const double v = cp * std::pow(x, p);
            j += Jet{v, p * v / x, p * (p - 1.0) * v / (x * x)};
        }
        return j;
    });
}

NoSwitchValue ou_closed(int regime, const OrnsteinUhlenbeck& o, const Reward& r, double alpha) {
    const double c0 = (r.constant + r.linear * o.level) / alpha;
    const double c1 = r.linear / (o.speed + alpha);
    const double level = o.level;
    return NoSwitchValue(regime, "ou-closed-form", [=](double x) { return Jet{c0 + c1 * (x - level), c1, 0.0}; });
}

/// Resolvent quadrature g(x) = φ(x)∫_lo^x ψ f m + ψ(x)∫_x^hi φ f m, m = 2/(σ²·Wronskian)
struct Resolvent {
    Fundamentals fund;
    RegimeSpec spec;
    Reward reward;
    double alpha = 0.0;
    std::vector<double> edges;
    std::vector<double> lower_cum, upper_cum;  // ∫_lo^{edge} ψfm and ∫_{edge}^hi φfm

    std::pair<double, double> densities(double y) const {
        auto [p, q] = fund.both(y);
        const double s = spec.vol(y);
        const double m = 2.0 / (s * s * (p.d1 * q.v - p.v * q.d1));
        const double f = reward(y);
        return {p.v * f * m, q.v * f * m};
    }

    void build(double lo, double hi, int cells) {
        const bool geometric = lo > 0.0 && hi / lo > 100.0;
        edges.resize(cells + 1);
        for (int k = 0; k <= cells; ++k) {
            const double t = double(k) / cells;
            edges[k] = geometric ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
        }
        edges.back() = hi;
        std::vector<double> a(cells, 0.0), b(cells, 0.0);
        for (int k = 0; k < cells; ++k) {
            for_each_node(edges[k], edges[k + 1], [&](double y, double w) {
                auto [da, db] = densities(y);
                a[k] += w * da;
                b[k] += w * db;
            });
        }
        lower_cum.assign(cells + 1, 0.0);
        upper_cum.assign(cells + 1, 0.0);
        for (int k = 0; k < cells; ++k) lower_cum[k + 1] = lower_cum[k] + a[k];
        for (int k = cells; k > 0; --k) upper_cum[k - 1] = upper_cum[k] + b[k - 1];

        // Truncation check: the outermost cells must carry a negligible share of g
        const double mid = geometric ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        auto [pm, qm] = fund.both(mid);
        const double scale = std::abs(qm.v * lower_cum[cells / 2]) + std::abs(pm.v * upper_cum[cells / 2]) + 1e-300;
        const double tail_hi = std::abs(pm.v * b[cells - 1]);
        const double tail_lo = std::abs(qm.v * a[0]);
        if (!(tail_hi <= 1e-8 * scale) || !(tail_lo <= 1e-8 * scale) || !std::isfinite(scale)) {
            std::ostringstream os;
            os << "reward not integrable against the resolvent (edge shares " << tail_lo / scale << ", "
               << tail_hi / scale << ")";
            throw Error(ErrorCode::ResolventDivergence, "reward", os.str());
        }
    }

    Jet operator()(double x) const {
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        if (x < edges.front() || x > edges.back())
            throw Error(ErrorCode::OutOfDomain, "x", "state outside the resolvent quadrature range");
        const std::size_t k = std::min<std::size_t>(it - edges.begin() - 1, edges.size() - 2);
        double part_a = 0.0, part_b = 0.0;
        if (x > edges[k]) {
            for_each_node(edges[k], x, [&](double y, double w) {
                auto [da, db] = densities(y);
                part_a += w * da;
                part_b += w * db;
            });
        }
        const double I1 = lower_cum[k] + part_a;
        const double I2 = upper_cum[k] - part_b;
        auto [p, q] = fund.both(x);
        const double v = q.v * I1 + p.v * I2;
        const double d1 = q.d1 * I1 + p.d1 * I2;
        const double s = spec.vol(x);
        const double d2 = 2.0 * (alpha * v - spec.drift(x) * d1 - reward(x)) / (s * s);
        return {v, d1, d2};
    }
};

}  // namespace

NoSwitchValue no_switch_value(const ValidatedProblem& vp, int regime, const Fundamentals& fund,
                              const NoSwitchOptions& opts) {
    const SwitchingProblem& p = vp.problem();
    const Reward& r = p.reward[regime];
    const RegimeSpec& spec = p.regimes[regime];
    if (r.is_zero()) return NoSwitchValue(regime, "zero", [](double) { return Jet{}; });
    if (!opts.force_quadrature && vp.closed_form_noswitch(regime)) {
        if (const auto* g = std::get_if<GeometricBM>(&spec.family)) return gbm_closed(regime, *g, r, p.discount);
        if (const auto* o = std::get_if<OrnsteinUhlenbeck>(&spec.family)) return ou_closed(regime, *o, r, p.discount);
    }
    auto res = std::make_shared<Resolvent>();
    res->fund = fund;
    res->spec = spec;
    res->reward = r;
    res->alpha = p.discount;
    auto [lo, hi] = fund.range();
    if (p.window) {
        lo = std::max(lo, p.window->first);
        hi = std::min(hi, p.window->second);
    }
    res->build(lo, hi, std::max(opts.cells, 8));
    return NoSwitchValue(regime, "resolvent-quadrature", [res](double x) { return (*res)(x); });
}

NoSwitchValue no_switch_value(const ValidatedProblem& problem, int regime) {
    return no_switch_value(problem, regime, build_fundamentals(problem, regime));
}

}  // namespace optswitch
