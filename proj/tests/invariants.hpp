#pragma once

#include "optswitch/majorant.hpp"
#include "optswitch/oracle.hpp"
#include "optswitch/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace invariants {

using namespace optswitch;

struct Check {
    std::string name;
    bool pass = false;
    double worst = 0.0;  ///< worst violation measure seen
    std::string detail;
};

/// States around the thresholds used by every property
inline std::vector<double> sample_states(const Solution& s, int count = 400) {
    const auto& p = s.model->problem.problem();
    const double a = *s.a_star, b = *s.b_star;
    const double lo = std::max({a - 2.0 * (b - a), p.lower.x + 0.1 * (a - p.lower.x), s.model->window.first});
    const double hi = std::min(b + 3.0 * (b - a), s.model->window.second);
    std::vector<double> xs(count);
    for (int k = 0; k < count; ++k) xs[k] = lo + (hi - lo) * (k + 0.5) / count;
    return xs;
}

inline double fd_generator_residual(const Fundamentals& f, const RegimeSpec& spec, double alpha, bool increasing,
                                    double x) {
    auto u = [&](double y) { return increasing ? f.psi(y).v : f.phi(y).v; };
    const double h = 2e-4 * std::max(1.0, std::abs(x));
    const double u0 = u(x), up = u(x + h), um = u(x - h), upp = u(x + 2 * h), umm = u(x - 2 * h);
    const double d1 = (-upp + 8 * up - 8 * um + umm) / (12 * h);
    const double d2 = (-upp + 16 * up - 30 * u0 + 16 * um - umm) / (12 * h * h);
    const double sig = spec.vol(x), mu = spec.drift(x);
    const double a = 0.5 * sig * sig * d2, b = mu * d1, c = alpha * u0;
    return std::abs(a + b - c) / (std::abs(a) + std::abs(b) + std::abs(c));
}

inline Check generator_kill(const Solution& s) {
    Check c{"generator-kill residual <= 1e-6"};
    const auto& m = *s.model;
    const auto xs = sample_states(s, 60);
    for (int i = 0; i < 2; ++i)
        for (bool inc : {true, false})
            for (double x : xs) {
                if (x - 4e-4 * std::max(1.0, std::abs(x)) <= m.problem->lower.x) continue;
                c.worst = std::max(c.worst, fd_generator_residual(m.fund[i], m.problem->regimes[i],
                                                                  m.problem->discount, inc, x));
            }
    c.pass = c.worst <= 1e-6;
    return c;
}

inline Check majorant_and_smooth_fit(const Solution& s) {
    Check c{"majorant property and smooth fit"};
    double worst_gap = 0.0, fit = 0.0;
    for (int regime = 0; regime < 2; ++regime) {
        const TransformedObstacle t = transform(solution_obstacle(s, regime));
        const Line& line = regime == kClosed ? s.w0_line : s.w1_line;
        const double other = regime == kClosed ? *s.a_star : *s.b_star;
        const double star = regime == kClosed ? *s.b_star : *s.a_star;
        const TransformedPoint at = t.at_state(star);
        const double scale = std::abs(at.R) + std::abs(t.anchor_R) + 1e-300;
        for (double x : sample_states(s)) {
            // The obstacle is built from the other regime's continuation value
            if (regime == kClosed ? x <= other : x >= other) continue;
            const TransformedPoint q = t.at_state(x);
            if (!std::isfinite(q.R)) continue;
            worst_gap = std::max(worst_gap, (q.R - line(q.y)) / scale);
        }
        fit = std::max({fit, std::abs(at.R - line(at.y)) / scale, std::abs(at.dR - line.slope) / std::abs(line.slope)});
    }
    c.worst = std::max(worst_gap, fit);
    c.pass = worst_gap <= 1e-9 && fit <= 1e-6;
    std::ostringstream os;
    os << "max (R - W)/scale = " << worst_gap << ", tangency mismatch = " << fit;
    c.detail = os.str();
    return c;
}

inline Check ordering_and_signs(const Solution& s) {
    Check c{"a* < b* and beta0* > 0 > beta1*"};
    c.pass = s.a_star && s.b_star && *s.a_star < *s.b_star && s.beta0_star > 0.0 && s.beta1_star < 0.0;
    std::ostringstream os;
    os << "a*=" << s.a_star.value_or(NAN) << " b*=" << s.b_star.value_or(NAN) << " beta0=" << s.beta0_star
       << " beta1=" << s.beta1_star;
    c.detail = os.str();
    return c;
}

inline Check value_above_noswitch(const Solution& s) {
    Check c{"v_i >= g_i"};
    for (double x : sample_states(s))
        for (int r = 0; r < 2; ++r) {
            const double v = s.v(r, x), g = s.g(r, x);
            c.worst = std::max(c.worst, (g - v) / (1.0 + std::abs(v)));
        }
    c.pass = c.worst <= 1e-9;
    return c;
}

/// v₀ ≥ v₁ − H₁ with equality exactly on [b*, d); v₁ ≥ v₀ − H₀ with equality exactly on (c, a*]
inline Check dominance(const Solution& s) {
    Check c{"no-immediate-switch dominance, equality exactly on switching regions"};
    const auto& p = s.model->problem.problem();
    const double a = *s.a_star, b = *s.b_star, band = 1e-3 * (b - a);
    double eq_err = 0.0, neg = 0.0;
    int strict_fail = 0;
    for (double x : sample_states(s)) {
        const double v0 = s.v0(x), v1 = s.v1(x);
        const double scale = 1.0 + std::abs(v0) + std::abs(v1);
        const double d0 = v0 - (v1 - p.cost_open(x)), d1 = v1 - (v0 - p.cost_close(x));
        neg = std::max({neg, -d0 / scale, -d1 / scale});
        if (x >= b) eq_err = std::max(eq_err, std::abs(d0) / scale);
        else if (x < b - band && !(d0 > 1e-12 * scale)) ++strict_fail;
        if (x <= a) eq_err = std::max(eq_err, std::abs(d1) / scale);
        else if (x > a + band && !(d1 > 1e-12 * scale)) ++strict_fail;
    }
    c.worst = std::max(eq_err, neg);
    c.pass = neg <= 1e-9 && eq_err <= 1e-9 && strict_fail == 0;
    std::ostringstream os;
    os << "worst negative gap " << neg << ", equality error " << eq_err << ", strictness failures " << strict_fail;
    c.detail = os.str();
    return c;
}

/// (v₁ − g₁)/ψ₁ is affine in G₁ on [a*, d) and (v₀ − g₀)/φ₀ is affine in F₀ on (c, b*]
inline Check transformed_affinity(const Solution& s) {
    Check c{"transformed-space affinity <= 1e-9"};
    const auto& m = *s.model;
    for (int regime = 0; regime < 2; ++regime) {
        std::vector<std::pair<double, double>> pts;
        for (double x : sample_states(s)) {
            if (regime == kOpen ? x < *s.a_star : x > *s.b_star) continue;
            const auto [psi, phi] = m.fund[regime].both(x);
            const double u = (s.v(regime, x) - s.g(regime, x)) / (regime == kOpen ? psi.v : phi.v);
            const double y = regime == kOpen ? m.fund[regime].G(x) : m.fund[regime].F(x);
            pts.emplace_back(y, u);
        }
        if (pts.size() < 3) continue;
        const auto [y0, u0] = pts.front();
        const auto [y1, u1] = pts.back();
        double umax = 0.0;
        for (const auto& q : pts) umax = std::max(umax, std::abs(q.second));
        for (const auto& [y, u] : pts) {
            const double line = u0 + (u1 - u0) * (y - y0) / (y1 - y0);
            c.worst = std::max(c.worst, std::abs(u - line) / umax);
        }
    }
    c.pass = c.worst <= 1e-9;
    return c;
}

inline Check scaling_covariance(const ValidatedProblem& problem, const Solution& s, const SolveOptions& opts) {
    Check c{"joint scaling covariance (kappa = 3.7)"};
    const double kappa = 3.7;
    const Solution k = solve(validate_problem(scale_rewards_and_costs(problem.problem(), kappa)), opts);
    double th = std::max(std::abs(*k.a_star / *s.a_star - 1.0), std::abs(*k.b_star / *s.b_star - 1.0));
    double val = 0.0;
    for (double x : sample_states(s, 9))
        for (int r = 0; r < 2; ++r) val = std::max(val, std::abs(k.v(r, x) - kappa * s.v(r, x)) / (kappa * (1.0 + std::abs(s.v(r, x)))));
    c.worst = std::max(th, val);
    c.pass = th <= 1e-8 && val <= 1e-8;
    std::ostringstream os;
    os << "threshold shift " << th << ", value mismatch " << val;
    c.detail = os.str();
    return c;
}

inline Check iteration_monotone(const ValidatedProblem& problem, int nodes) {
    Check c{"value-iteration monotonicity"};
    GridOptions g;
    g.nodes = nodes;
    const IterationReport rep = value_iteration(problem, build_grid_scheme(problem, g));
    c.pass = rep.monotone && rep.converged;
    c.worst = -rep.min_step;
    std::ostringstream os;
    os << rep.iterations << " sweeps, most negative change " << rep.min_step;
    c.detail = os.str();
    return c;
}

/// Complete property suite for one solved problem
inline std::vector<Check> run_suite(const ValidatedProblem& problem, const SolveOptions& opts, int vi_nodes = 500) {
    const Solution s = solve(problem, opts);
    std::vector<Check> out;
    out.push_back(ordering_and_signs(s));
    if (!out.back().pass) return out;
    out.push_back(generator_kill(s));
    out.push_back(majorant_and_smooth_fit(s));
    out.push_back(value_above_noswitch(s));
    out.push_back(dominance(s));
    out.push_back(transformed_affinity(s));
    out.push_back(scaling_covariance(problem, s, opts));
    out.push_back(iteration_monotone(problem, vi_nodes));
    return out;
}

}  // namespace invariants
