#include "optswitch/solver.hpp"

#include "optswitch/error.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace optswitch {

std::string_view to_string(Coupling c) { return c == Coupling::SlopeOnly ? "slope_only" : "anchored"; }

std::string_view to_string(Outcome o) { return o == Outcome::Switching ? "switching" : "no_switch_everywhere"; }

namespace {

/// Everything the two tangency maps need, with the β-free scan jets cached
struct Context {
    std::shared_ptr<const SwitchingModel> model;
    BoundaryLimits limits;
    Coupling coupling = Coupling::SlopeOnly;
    std::array<std::pair<double, double>, 2> anchor;
    std::array<std::vector<StateJets>, 2> jets;

    /// Intercept of a regime's line W(y) = β·y + intercept through its anchor
    double intercept(int regime, double beta) const { return anchor[regime].second - beta * anchor[regime].first; }

    /// Intercept passed into the opposing obstacle
    double coupled_intercept(int other, double beta_other) const {
        return coupling == Coupling::Anchored ? intercept(other, beta_other) : 0.0;
    }

    TransformedPoint point(const StateJets& s, int regime, double beta_other) const {
        const int other = 1 - regime;
        return transformed_point(s, beta_other, coupled_intercept(other, beta_other), anchor[regime].first,
                                 anchor[regime].second);
    }

    /// Tangency of one regime's obstacle. The obstacle built from the other regime's
    /// continuation value is only valid where that regime continues, so scan points on
    /// the near side of its threshold (when known) are dropped.
    TangencyResult tangency(int regime, double beta_other, std::optional<double> other_threshold = {}) const {
        std::vector<ScanPoint> scan;
        scan.reserve(jets[regime].size());
        for (const StateJets& s : jets[regime]) {
            if (other_threshold && (regime == kClosed ? s.x <= *other_threshold : s.x >= *other_threshold)) continue;
            scan.push_back({s.x, point(s, regime, beta_other)});
        }
        auto eval = [&](double x) { return point(state_jets(*model, regime, x), regime, beta_other); };
        return tangency_scan(eval, scan, anchor[regime].first, anchor[regime].second, regime == kClosed ? 1 : -1);
    }
};

Context make_context(const ValidatedProblem& problem, const SolveOptions& opts) {
    Context ctx;
    ctx.model = build_model(problem, opts.model);
    ctx.coupling = opts.coupling;
    if (opts.assume_zero_limits) {
        if (problem->lower.kind == BoundaryKind::Natural) ctx.limits.l_c.kind = LimitKind::Zero;
        if (problem->upper.kind == BoundaryKind::Natural) ctx.limits.l_d.kind = LimitKind::Zero;
    } else {
        ctx.limits = classify_boundary_limits(*ctx.model);
    }
    for (const auto* l : {&ctx.limits.l_c, &ctx.limits.l_d}) {
        const char* name = l == &ctx.limits.l_c ? "l_c" : "l_d";
        if (l->kind == LimitKind::Infinite)
            throw Error(ErrorCode::InfiniteValue, name, "boundary limit is +infinity: both value functions are infinite");
        if (l->kind == LimitKind::FinitePositive) {
            std::ostringstream os;
            os << "strictly positive finite boundary limit " << l->value << " is not supported";
            throw Error(ErrorCode::UnsupportedBoundaryLimit, name, os.str());
        }
    }
    for (int r = 0; r < 2; ++r) {
        ctx.anchor[r] = ctx.model->anchor(r);
        ctx.jets[r] = state_jets_batch(*ctx.model, r, scan_states(*ctx.model, r, opts.scan_points), opts.parallel_scan);
    }
    return ctx;
}

/// Start from "never close": v₁ = g₁ makes the regime-0 obstacle the plain payoff
double default_beta1(const SwitchingModel&) { return 0.0; }

Solution assemble(const Context& ctx, std::optional<double> a, std::optional<double> b, double beta0, double beta1) {
    Solution s;
    s.model = ctx.model;
    s.coupling = ctx.coupling;
    s.limits = ctx.limits;
    s.a_star = a;
    s.b_star = b;
    s.beta0_star = beta0;
    s.beta1_star = beta1;
    s.outcome = (!a && !b) ? Outcome::NoSwitchEverywhere : Outcome::Switching;
    s.w0_line = {beta0, ctx.intercept(kClosed, beta0), ctx.anchor[kClosed].first, ctx.anchor[kClosed].second};
    s.w1_line = {beta1, ctx.intercept(kOpen, beta1), ctx.anchor[kOpen].first, ctx.anchor[kOpen].second};
    double res = 0.0;
    if (b) res = std::max(res, std::abs(ctx.point(state_jets(*ctx.model, kClosed, *b), kClosed, beta1).T));
    if (a) res = std::max(res, std::abs(ctx.point(state_jets(*ctx.model, kOpen, *a), kOpen, beta0).T));
    s.residual = res;
    if (a && b && !(*a < *b)) {
        std::ostringstream os;
        os << "thresholds a=" << *a << " and b=" << *b << " are not ordered";
        throw Error(ErrorCode::OrderingViolation, "thresholds", os.str());
    }
    return s;
}

}  // namespace

Solution solve(const ValidatedProblem& problem, const SolveOptions& opts) {
    const Context ctx = make_context(problem, opts);
    double beta1p = opts.initial_beta1.value_or(default_beta1(*ctx.model));
    std::vector<double> trace;

    std::optional<double> a_prev;
    auto regime0 = [&](double beta1, std::optional<double>& b) {
        const TangencyResult r = ctx.tangency(kClosed, beta1, a_prev);
        if (const auto* t = std::get_if<Tangency>(&r)) {
            b = t->x;
            return t->beta;
        }
        b.reset();
        return 0.0;
    };
    std::optional<double> b_cur;
    auto regime1 = [&](double beta0, std::optional<double>& a) {
        const TangencyResult r = ctx.tangency(kOpen, beta0, b_cur);
        if (const auto* t = std::get_if<Tangency>(&r)) {
            a = t->x;
            return t->beta;
        }
        a.reset();
        return 0.0;
    };

    for (int it = 1; it <= opts.max_iterations; ++it) {
        std::optional<double> a, b;
        const double beta0 = regime0(beta1p, b);
        b_cur = b;
        const double beta1 = regime1(beta0, a);
        trace.push_back(beta1);
        if (std::abs(beta1 - beta1p) <= opts.tolerance * (1.0 + std::abs(beta1))) {
            // Re-solve regime 0 at the converged slope so both tangencies share it
            a_prev = a;
            const double beta0f = regime0(beta1, b);
            Solution s = assemble(ctx, a, b, beta0f, beta1);
            s.iterations = it;
            s.beta1_trace = std::move(trace);
            s.method = "fixed-point";
            return s;
        }
        a_prev = a;
        const double step = beta1 - beta1p;
        const bool flip = beta1p != 0.0 && std::signbit(beta1) != std::signbit(beta1p);
        const bool jump = beta1p != 0.0 && std::abs(beta1) > 10.0 * std::abs(beta1p);
        beta1p += (flip || jump) ? 0.5 * step : step;
    }
    std::ostringstream os;
    os << "fixed-point iteration did not converge in " << opts.max_iterations << " iterations; last beta1 iterates:";
    for (std::size_t k = trace.size() > 5 ? trace.size() - 5 : 0; k < trace.size(); ++k) os << ' ' << trace[k];
    throw Error(ErrorCode::NonConvergence, "beta1", os.str());
}

Solution solve_simultaneous(const ValidatedProblem& problem, const SolveOptions& opts) {
    const Context ctx = make_context(problem, opts);
    const auto& m = *ctx.model;
    const auto [lo, hi] = m.window;

    double a = 0.0, b = 0.0;
    if (opts.initial_thresholds) {
        a = opts.initial_thresholds->first;
        b = opts.initial_thresholds->second;
        if (a > b) std::swap(a, b);
    } else {
        const double beta1 = opts.initial_beta1.value_or(default_beta1(m));
        const TangencyResult r0 = ctx.tangency(kClosed, beta1);
        const auto* t0 = std::get_if<Tangency>(&r0);
        const TangencyResult r1 =
            ctx.tangency(kOpen, t0 ? t0->beta : 0.0, t0 ? std::optional<double>(t0->x) : std::nullopt);
        const auto* t1 = std::get_if<Tangency>(&r1);
        if (!t0 || !t1) {
            // One-sided or no switching: the Newton system degenerates
            Solution s = solve(problem, opts);
            s.method = "fixed-point (degenerate system)";
            return s;
        }
        a = t1->x;
        b = t0->x;
        if (!(a < b)) std::swap(a, b);
    }

    struct Eval {
        double T0, T1, beta0, beta1, R0, R1;
    };
    auto evaluate = [&](double aa, double bb) {
        const StateJets s0 = state_jets(m, kClosed, bb), s1 = state_jets(m, kOpen, aa);
        auto slope0 = [&](double beta1) {
            const auto p = ctx.point(s0, kClosed, beta1);
            return (p.R - ctx.anchor[kClosed].second) / (p.y - ctx.anchor[kClosed].first);
        };
        auto slope1 = [&](double beta0) {
            const auto p = ctx.point(s1, kOpen, beta0);
            return (p.R - ctx.anchor[kOpen].second) / (p.y - ctx.anchor[kOpen].first);
        };
        // Each secant slope is affine in the opposing slope
        const double c0 = slope0(0.0), e0 = slope0(1.0) - c0;
        const double c1 = slope1(0.0), e1 = slope1(1.0) - c1;
        const double beta0 = (c0 + e0 * c1) / (1.0 - e0 * e1);
        const double beta1 = c1 + e1 * beta0;
        const auto p0 = ctx.point(s0, kClosed, beta1), p1 = ctx.point(s1, kOpen, beta0);
        return Eval{p0.T, p1.T, beta0, beta1, p0.R, p1.R};
    };

    Eval cur = evaluate(a, b);
    const double sc0 = std::abs(cur.R0) + std::abs(ctx.anchor[kClosed].second) + 1e-300;
    const double sc1 = std::abs(cur.R1) + std::abs(ctx.anchor[kOpen].second) + 1e-300;
    auto merit = [&](const Eval& e) { return std::hypot(e.T0 / sc0, e.T1 / sc1); };
    int it = 0;
    for (; it < 100; ++it) {
        if (merit(cur) <= 1e-15) break;
        const double ha = 1e-7 * (std::abs(a) + 1e-3 * (hi - lo > 1.0 ? 1.0 : hi - lo));
        const double hb = 1e-7 * (std::abs(b) + 1e-3 * (hi - lo > 1.0 ? 1.0 : hi - lo));
        const Eval pa = evaluate(a + ha, b), ma = evaluate(a - ha, b);
        const Eval pb = evaluate(a, b + hb), mb = evaluate(a, b - hb);
        const double J00 = (pa.T0 - ma.T0) / (2 * ha), J01 = (pb.T0 - mb.T0) / (2 * hb);
        const double J10 = (pa.T1 - ma.T1) / (2 * ha), J11 = (pb.T1 - mb.T1) / (2 * hb);
        const double det = J00 * J11 - J01 * J10;
        if (!std::isfinite(det) || det == 0.0) throw Error(ErrorCode::NonConvergence, "jacobian", "singular Newton system");
        const double da = -(J11 * cur.T0 - J01 * cur.T1) / det;
        const double db = -(-J10 * cur.T0 + J00 * cur.T1) / det;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, lambda *= 0.5) {
            const double na = a + lambda * da, nb = b + lambda * db;
            if (!(na > lo && nb < hi && na < nb)) continue;
            const Eval next = evaluate(na, nb);
            if (std::isfinite(next.T0) && std::isfinite(next.T1) && merit(next) < merit(cur)) {
                a = na;
                b = nb;
                cur = next;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        if (std::abs(lambda * da) <= 1e-15 * std::abs(a) && std::abs(lambda * db) <= 1e-15 * std::abs(b)) break;
    }
    if (!(merit(cur) <= 1e-11)) {
        std::ostringstream os;
        os << "Newton iteration stalled at a=" << a << ", b=" << b << " with scaled residual " << merit(cur);
        throw Error(ErrorCode::NonConvergence, "thresholds", os.str());
    }
    Solution s = assemble(ctx, a, b, cur.beta0, cur.beta1);
    s.iterations = it;
    s.method = "simultaneous-newton";
    return s;
}

double evaluate_value(const Solution& s, int regime, double x) {
    const SwitchingModel& m = *s.model;
    const auto& p = m.problem.problem();
    const bool at_lower = x == p.lower.x && p.lower.kind == BoundaryKind::Absorbing;
    const bool at_upper = x == p.upper.x && p.upper.kind == BoundaryKind::Absorbing;
    if (!(x > p.lower.x || at_lower) || !(x < p.upper.x || at_upper)) {
        std::ostringstream os;
        os << "state " << x << " outside the state interval";
        throw Error(ErrorCode::OutOfDomain, "x", os.str());
    }
    auto vhat0 = [&](double y) {
        auto [psi, phi] = m.fund[kClosed].both(y);
        return s.w0_line.slope * psi.v + s.w0_line.intercept * phi.v + m.g[kClosed](y);
    };
    auto vhat1 = [&](double y) {
        auto [psi, phi] = m.fund[kOpen].both(y);
        return -s.w1_line.slope * phi.v + s.w1_line.intercept * psi.v + m.g[kOpen](y);
    };
    if (regime == kClosed) {
        if (s.b_star && x > *s.b_star) return vhat1(x) - p.cost_open(x);
        return vhat0(x);
    }
    if (s.a_star && x < *s.a_star) return vhat0(x) - p.cost_close(x);
    return vhat1(x);
}

Obstacle solution_obstacle(const Solution& s, int regime) {
    const Line& other = regime == kClosed ? s.w1_line : s.w0_line;
    return build_obstacle(s.model, regime, other.slope, s.coupling == Coupling::Anchored ? other.intercept : 0.0);
}

double Solution::v(int regime, double x) const { return evaluate_value(*this, regime, x); }

}  // namespace optswitch
