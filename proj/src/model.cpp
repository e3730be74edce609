#include "optswitch/model.hpp"

#include "optswitch/error.hpp"

#include <cmath>
#include <string>
#include <vector>
#include <algorithm>

namespace optswitch {

namespace {

struct DriftVisitor {
    double x;
    double operator()(const GeometricBM& g) const { return g.drift * x; }
    double operator()(const OrnsteinUhlenbeck& o) const { return o.speed * (o.level - x); }
    double operator()(const CustomDiffusion& c) const { return c.drift(x); }
};

struct VolVisitor {
    double x;
    double operator()(const GeometricBM& g) const { return g.vol * x; }
    double operator()(const OrnsteinUhlenbeck& o) const { return o.vol; }
    double operator()(const CustomDiffusion& c) const { return c.vol(x); }
};

std::string regime_field(int i, const char* name) {
    return std::string("regime[") + std::to_string(i) + "]." + name;
}

/// Interior sample points used for pointwise positivity checks
std::vector<double> sample_points(const SwitchingProblem& p) {
    double lo = p.lower.x, hi = p.upper.x;
    if (p.window) {
        lo = p.window->first;
        hi = p.window->second;
    }
    std::vector<double> xs;
    if (std::isfinite(lo) && std::isfinite(hi)) {
        for (int k = 1; k <= 100; ++k) xs.push_back(lo + (hi - lo) * k / 101.0);
    } else if (std::isfinite(lo)) {
        const double base = lo >= 0.0 ? std::max(lo, 1e-6) : lo;
        for (int k = 0; k < 100; ++k) {
            xs.push_back(lo >= 0.0 ? base * std::pow(10.0, 12.0 * k / 99.0) : lo + std::pow(10.0, 0.1 * k) - 1.0);
        }
    } else {
        for (int k = 0; k < 101; ++k) xs.push_back(-50.0 + k);
    }
    return xs;
}

}  // namespace

double RegimeSpec::drift(double x) const { return std::visit(DriftVisitor{x}, family); }
double RegimeSpec::vol(double x) const { return std::visit(VolVisitor{x}, family); }

double Reward::operator()(double x) const {
    double f = constant + linear * x;
    if (power_coef != 0.0) f += power_coef * std::pow(x, power_exp);
    if (custom) f += custom(x);
    return f;
}

Reward Reward::scaled(double k) const {
    Reward r = *this;
    r.constant *= k;
    r.linear *= k;
    r.power_coef *= k;
    if (custom) {
        auto inner = custom;
        r.custom = [inner, k](double x) { return k * inner(x); };
    }
    return r;
}

Jet Cost::jet(double x) const {
    if (!custom) return constant_jet(constant);
    const double h = 1e-4 * (1.0 + std::abs(x));
    const double fp = custom(x + h), f0 = custom(x), fm = custom(x - h);
    return {f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

Cost Cost::scaled(double k) const {
    Cost c = *this;
    c.constant *= k;
    if (custom) {
        auto inner = custom;
        c.custom = [inner, k](double x) { return k * inner(x); };
    }
    return c;
}

ValidatedProblem validate_problem(const SwitchingProblem& p) {
    if (!(p.discount > 0.0) || !std::isfinite(p.discount))
        throw Error(ErrorCode::InvalidParameter, "discount", "discount rate must be positive and finite");
    if (!(p.lower.x < p.upper.x))
        throw Error(ErrorCode::BadInterval, "interval", "lower endpoint must be below upper endpoint");
    if (p.lower.kind == BoundaryKind::Absorbing && !std::isfinite(p.lower.x))
        throw Error(ErrorCode::BadInterval, "interval.lower", "absorbing endpoint must be finite");
    if (p.upper.kind == BoundaryKind::Absorbing && !std::isfinite(p.upper.x))
        throw Error(ErrorCode::BadInterval, "interval.upper", "absorbing endpoint must be finite");
    if (p.window) {
        const auto [wl, wh] = *p.window;
        if (!(wl < wh) || wl < p.lower.x || wh > p.upper.x)
            throw Error(ErrorCode::BadInterval, "window", "window must be an ordered sub-interval of the state interval");
    }

    ValidatedProblem out;
    for (int i = 0; i < 2; ++i) {
        const auto& r = p.regimes[i];
        if (const auto* g = std::get_if<GeometricBM>(&r.family)) {
            if (!(g->vol > 0.0)) throw Error(ErrorCode::NonPositiveVol, regime_field(i, "vol"), "volatility must be positive");
            if (p.lower.x < 0.0) throw Error(ErrorCode::BadInterval, "interval.lower", "GBM state space must be positive");
            if (p.lower.x == 0.0 && p.lower.kind == BoundaryKind::Absorbing)
                throw Error(ErrorCode::BadInterval, "interval.lower", "GBM cannot be absorbed at 0");
            if (!(p.discount > g->drift))
                throw Error(ErrorCode::DiscountTooSmall, regime_field(i, "drift"), "GBM requires discount > drift");
            out.closed_fund_[i] = true;
            out.closed_g_[i] = !p.reward[i].custom;
        } else if (const auto* o = std::get_if<OrnsteinUhlenbeck>(&r.family)) {
            if (!(o->vol > 0.0)) throw Error(ErrorCode::NonPositiveVol, regime_field(i, "vol"), "volatility must be positive");
            if (!(o->speed > 0.0)) throw Error(ErrorCode::InvalidParameter, regime_field(i, "speed"), "reversion speed must be positive");
            out.closed_fund_[i] = true;
            out.closed_g_[i] = p.reward[i].is_affine();
        } else {
            const auto& c = std::get<CustomDiffusion>(r.family);
            if (!c.drift || !c.vol) throw Error(ErrorCode::InvalidParameter, regime_field(i, "family"), "custom regime needs drift and vol");
            if (!p.window && !(std::isfinite(p.lower.x) && std::isfinite(p.upper.x)))
                throw Error(ErrorCode::BadInterval, "window", "custom regimes on unbounded intervals need a computational window");
            for (double x : sample_points(p))
                if (!(c.vol(x) > 0.0))
                    throw Error(ErrorCode::NonPositiveVol, regime_field(i, "vol"), "volatility not positive at x=" + std::to_string(x));
            out.closed_g_[i] = p.reward[i].is_zero();
        }
        if (p.reward[i].power_coef != 0.0 && p.lower.x < 0.0)
            throw Error(ErrorCode::InvalidParameter, regime_field(i, "reward_power_coef"), "power reward requires a nonnegative state space");
    }

    for (double x : sample_points(p)) {
        if (!(p.cost_open(x) > 0.0)) throw Error(ErrorCode::NonPositiveCost, "cost_open", "switching cost must be positive");
        if (!(p.cost_close(x) > 0.0)) throw Error(ErrorCode::NonPositiveCost, "cost_close", "switching cost must be positive");
    }

    out.problem_ = std::make_shared<const SwitchingProblem>(p);
    return out;
}

SwitchingProblem scale_rewards_and_costs(const SwitchingProblem& problem, double k) {
    SwitchingProblem p = problem;
    p.reward[0] = problem.reward[0].scaled(k);
    p.reward[1] = problem.reward[1].scaled(k);
    p.cost_open = problem.cost_open.scaled(k);
    p.cost_close = problem.cost_close.scaled(k);
    return p;
}

}  // namespace optswitch
