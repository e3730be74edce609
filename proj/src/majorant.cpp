#include "optswitch/majorant.hpp"

#include "optswitch/error.hpp"
#include "optswitch/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace optswitch {

// ---------------------------------------------------------------------------
// Model

std::shared_ptr<const SwitchingModel> build_model(const ValidatedProblem& problem, const ModelOptions& opts) {
    auto m = std::make_shared<SwitchingModel>();
    m->problem = problem;
    for (int r = 0; r < 2; ++r) m->fund[r] = build_fundamentals(problem, r, opts.numeric);
    m->window = computational_window(problem, m->fund[0], m->fund[1]);
    for (int r = 0; r < 2; ++r) m->g[r] = no_switch_value(problem, r, m->fund[r], opts.noswitch);
    return m;
}

Jet SwitchingModel::K(int regime, double x) const {
    const int other = 1 - regime;
    return g[other].jet(x) - g[regime].jet(x) - problem->cost_into(other).jet(x);
}

std::pair<Jet, Jet> SwitchingModel::transform_pair(int regime, double x) const {
    auto [p, q] = fund[regime].both(x);
    if (regime == kClosed) return {p, q};
    return {-q, p};
}

Jet SwitchingModel::slope_basis(int regime, double x) const {
    return regime == kClosed ? -fund[kOpen].phi(x) : fund[kClosed].psi(x);
}

Jet SwitchingModel::intercept_basis(int regime, double x) const {
    return regime == kClosed ? fund[kOpen].psi(x) : fund[kClosed].phi(x);
}

std::pair<double, double> SwitchingModel::anchor(int regime) const {
    const SwitchingProblem& p = problem.problem();
    if (regime == kClosed) {
        if (p.lower.kind == BoundaryKind::Natural) return {0.0, 0.0};
        const double c = p.lower.x;
        return {fund[kClosed].F(c), -g[kClosed](c) / fund[kClosed].phi(c).v};
    }
    if (p.upper.kind == BoundaryKind::Natural) return {0.0, 0.0};
    const double d = p.upper.x;
    return {fund[kOpen].G(d), -g[kOpen](d) / fund[kOpen].psi(d).v};
}

// ---------------------------------------------------------------------------
// Boundary limits

std::string_view to_string(LimitKind kind) {
    switch (kind) {
    case LimitKind::Zero: return "zero";
    case LimitKind::FinitePositive: return "finite_positive";
    case LimitKind::Infinite: return "infinite";
    case LimitKind::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

namespace {

constexpr double kDecay = 1e-8;
constexpr double kDiverge = 1e8;
constexpr int kLimitPoints = 40;

/// +1 / -1 when log|column| grows / decays at a steady rate over the tail, 0 otherwise
int log_trend(const std::vector<std::array<double, 3>>& seq, int column) {
    constexpr int kTail = 10;
    std::vector<double> steps;
    for (int k = kLimitPoints - kTail; k < kLimitPoints; ++k) {
        const double prev = seq[k - 1][column], cur = seq[k][column];
        if (!(prev > 0.0) || !(cur > 0.0)) return 0;
        steps.push_back(std::log(cur / prev));
    }
    const auto [lo, hi] = std::minmax_element(steps.begin(), steps.end());
    // Every step the same sign, not negligible, and within 25% of each other
    if (*lo > 1e-3 && *hi < 1.25 * *lo) return 1;
    if (*hi < -1e-3 && *lo > 1.25 * *hi) return -1;
    return 0;
}

LimitClass classify_sequence(std::vector<std::array<double, 3>> seq, const char* name) {
    LimitClass out;
    out.sequence = std::move(seq);
    const auto& last = out.sequence.back();
    const double a = last[1], b = last[2];
    if (!std::isfinite(a) || !std::isfinite(b) || std::max(a, b) > kDiverge) {
        out.kind = LimitKind::Infinite;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    if (a < kDecay && b < kDecay) {
        out.kind = LimitKind::Zero;
        return out;
    }
    bool settled = true;
    for (int k = kLimitPoints - 5; k < kLimitPoints; ++k) {
        for (int c = 1; c <= 2; ++c) {
            const double prev = out.sequence[k - 1][c], cur = out.sequence[k][c];
            if (std::abs(cur - prev) > 1e-3 * std::max(std::abs(cur), kDecay)) settled = false;
        }
    }
    if (settled) {
        out.kind = LimitKind::FinitePositive;
        out.value = a;
        return out;
    }
    // Slow power-law trends: log ratio moving steadily in one direction
    const int trend_a = log_trend(out.sequence, 1), trend_b = log_trend(out.sequence, 2);
    if (trend_a > 0 || trend_b > 0) {
        out.kind = LimitKind::Infinite;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    if ((trend_a < 0 || a < kDecay) && (trend_b < 0 || b < kDecay)) {
        out.kind = LimitKind::Zero;
        return out;
    }
    std::ostringstream os;
    os << "ratios neither decay below " << kDecay << " nor exceed " << kDiverge << " (last: " << a << ", " << b
       << " at x=" << last[0] << ")";
    throw Error(ErrorCode::InconclusiveLimit, name, os.str());
}

std::vector<double> approach(double from, double to) {
    std::vector<double> xs(kLimitPoints);
    const bool geometric = from > 0.0 && to > 0.0;
    for (int k = 0; k < kLimitPoints; ++k) {
        const double t = double(k + 1) / kLimitPoints;
        xs[k] = geometric ? from * std::pow(to / from, t) : from + (to - from) * t;
    }
    return xs;
}

}  // namespace

BoundaryLimits classify_boundary_limits(const SwitchingModel& m) {
    const SwitchingProblem& p = m.problem.problem();
    const auto [lo, hi] = m.window;
    const double mid = lo > 0.0 && hi / lo > 100.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    BoundaryLimits out;
    if (p.upper.kind == BoundaryKind::Natural) {
        std::vector<std::array<double, 3>> seq;
        for (double x : approach(mid, hi)) {
            const double psi1 = m.fund[kOpen].psi(x).v;
            seq.push_back({x, std::max(m.K(kOpen, x).v, 0.0) / psi1, m.fund[kClosed].psi(x).v / psi1});
        }
        out.l_d = classify_sequence(std::move(seq), "l_d");
    }
    if (p.lower.kind == BoundaryKind::Natural) {
        std::vector<std::array<double, 3>> seq;
        for (double x : approach(mid, lo)) {
            const double phi0 = m.fund[kClosed].phi(x).v;
            seq.push_back({x, std::max(m.K(kClosed, x).v, 0.0) / phi0, m.fund[kOpen].phi(x).v / phi0});
        }
        out.l_c = classify_sequence(std::move(seq), "l_c");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Obstacles

Jet Obstacle::r(double x) const {
    Jet h = model->K(regime, x);
    if (beta_other != 0.0) h += beta_other * model->slope_basis(regime, x);
    if (intercept_other != 0.0) h += intercept_other * model->intercept_basis(regime, x);
    return h;
}

double Obstacle::generator_residual(double x) const {
    return model->problem->regimes[regime].generator_minus(x, r(x), model->problem->discount);
}

Obstacle build_obstacle(std::shared_ptr<const SwitchingModel> model, int regime, double beta_other,
                        double intercept_other) {
    if (regime != 0 && regime != 1) throw Error(ErrorCode::InvalidParameter, "regime", "regime index must be 0 or 1");
    return Obstacle{std::move(model), regime, beta_other, intercept_other};
}

StateJets state_jets(const SwitchingModel& m, int regime, double x) {
    StateJets s;
    s.x = x;
    std::tie(s.N, s.D) = m.transform_pair(regime, x);
    s.K = m.K(regime, x);
    s.slope = m.slope_basis(regime, x);
    s.intercept = m.intercept_basis(regime, x);
    const auto& spec = m.problem->regimes[regime];
    s.drift = spec.drift(x);
    const double sig = spec.vol(x);
    s.var = sig * sig;
    s.alpha = m.problem->discount;
    return s;
}

std::vector<StateJets> state_jets_batch(const SwitchingModel& m, int regime, const std::vector<double>& xs,
                                        bool parallel) {
    std::vector<StateJets> out(xs.size());
    const long n = static_cast<long>(xs.size());
    if (parallel) {
        // Evaluations are pure; failures are collected and rethrown on the calling thread
        std::vector<std::exception_ptr> errors(xs.size());
#pragma omp parallel for schedule(dynamic, 4)
        for (long i = 0; i < n; ++i) {
            try {
                out[i] = state_jets(m, regime, xs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    } else {
        for (long i = 0; i < n; ++i) out[i] = state_jets(m, regime, xs[i]);
    }
    return out;
}

TransformedPoint transformed_point(const StateJets& s, double beta, double intercept, double anchor_y,
                                   double anchor_R) {
    Jet h = s.K;
    if (beta != 0.0) h += beta * s.slope;
    if (intercept != 0.0) h += intercept * s.intercept;
    const Jet& N = s.N;
    const Jet& D = s.D;
    TransformedPoint p;
    p.x = s.x;
    p.y = N.v / D.v;
    const double wr = N.d1 * D.v - N.v * D.d1;
    p.dydx = wr / (D.v * D.v);
    p.R = h.v / D.v;
    p.dR = (h.d1 * D.v - h.v * D.d1) / wr;
    const double Ah = 0.5 * s.var * h.d2 + s.drift * h.d1 - s.alpha * h.v;
    p.d2R = 2.0 * D.v * D.v * D.v * Ah / (s.var * wr * wr);
    p.T = p.dR * (p.y - anchor_y) - (p.R - anchor_R);
    p.dTdx = p.d2R * p.dydx * (p.y - anchor_y);
    return p;
}

TransformedPoint TransformedObstacle::at_state(double x) const {
    const StateJets s = state_jets(*obstacle.model, obstacle.regime, x);
    return transformed_point(s, obstacle.beta_other, obstacle.intercept_other, anchor_y, anchor_R);
}

double TransformedObstacle::state_of(double y) const {
    const auto& f = obstacle.model->fund[obstacle.regime];
    return obstacle.regime == kClosed ? f.F_inverse(y) : f.G_inverse(y);
}

double TransformedObstacle::R(double y) const { return at_state(state_of(y)).R; }

TransformedObstacle transform(const Obstacle& obstacle) {
    TransformedObstacle t;
    t.obstacle = obstacle;
    std::tie(t.anchor_y, t.anchor_R) = obstacle.model->anchor(obstacle.regime);
    const auto [lo, hi] = obstacle.model->window;
    const auto& f = obstacle.model->fund[obstacle.regime];
    t.domain = {t.anchor_y, obstacle.regime == kClosed ? f.F(hi) : f.G(lo)};
    return t;
}

int concavity_sign(const Obstacle& obstacle, double x) {
    const Jet h = obstacle.r(x);
    const auto& spec = obstacle.model->problem->regimes[obstacle.regime];
    const double alpha = obstacle.model->problem->discount;
    const double sig = spec.vol(x), mu = spec.drift(x);
    const double a = 0.5 * sig * sig * h.d2, b = mu * h.d1, c = alpha * h.v;
    const double res = a + b - c;
    if (std::abs(res) <= 1e-9 * (std::abs(a) + std::abs(b) + std::abs(c))) return 0;
    return res > 0.0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Tangency

std::vector<double> scan_states(const SwitchingModel& m, int regime, int count) {
    const auto [lo, hi] = m.window;
    const bool geometric = lo > 0.0 && hi / lo > 100.0;
    // Keep at least 20 points per decade on wide geometric windows
    if (geometric) count = std::max(count, static_cast<int>(std::ceil(20.0 * std::log10(hi / lo))));
    std::vector<double> xs(count);
    for (int k = 0; k < count; ++k) {
        const double t = (k + 0.5) / count;
        xs[k] = geometric ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    if (!geometric) {
        // Mean-reverting regimes: a second layer of points where the process actually lives
        double band_lo = hi, band_hi = lo;
        for (const RegimeSpec& spec : m.problem->regimes) {
            if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec.family)) {
                const double sd = ou->vol / std::sqrt(2.0 * ou->speed);
                band_lo = std::min(band_lo, ou->level - 6.0 * sd);
                band_hi = std::max(band_hi, ou->level + 6.0 * sd);
            }
        }
        band_lo = std::max(band_lo, lo);
        band_hi = std::min(band_hi, hi);
        if (band_lo < band_hi && band_hi - band_lo < 0.5 * (hi - lo)) {
            for (int k = 0; k < count; ++k) xs.push_back(band_lo + (band_hi - band_lo) * (k + 0.5) / count);
            std::sort(xs.begin(), xs.end());
        }
    }
    if (regime == kOpen) std::reverse(xs.begin(), xs.end());
    return xs;
}

TangencyResult tangency_scan(const std::function<TransformedPoint(double)>& eval, const std::vector<ScanPoint>& scan,
                             double anchor_y, double anchor_R, int sign) {
    std::vector<std::size_t> valid;
    for (std::size_t j = 0; j < scan.size(); ++j) {
        const auto& p = scan[j].p;
        if (sign * (p.y - anchor_y) > 0.0 && std::isfinite(p.R) && std::isfinite(p.T)) valid.push_back(j);
    }
    if (valid.size() < 3) throw Error(ErrorCode::BracketFailure, "scan", "fewer than three usable scan points");

    // Past the first dip of R below the anchor the obstacle is the relevant one (q-point);
    // without such a dip the whole scan is
    auto R = [&](std::size_t k) { return scan[valid[k]].p.R; };
    std::size_t q = 0;
    for (std::size_t k = 0; k + 1 < valid.size(); ++k) {
        if (R(k) < anchor_R && R(k) <= R(k + 1) && (k == 0 || R(k) <= R(k - 1))) {
            q = k;
            break;
        }
    }

    bool above = false;
    for (std::size_t k = q; k < valid.size(); ++k)
        if (scan[valid[k]].p.R > anchor_R) above = true;
    if (!above) return NoSwitchSignal{false};

    auto slope = [&](const TransformedPoint& p) { return (p.R - anchor_R) / (p.y - anchor_y); };
    auto steep = [&](std::size_t k) { return sign * slope(scan[valid[k]].p); };
    const std::size_t n = valid.size();
    std::size_t top = q;
    for (std::size_t k = q; k < n; ++k)
        if (steep(k) > steep(top)) top = k;
    if (top + 1 == n) return NoSwitchSignal{true};

    // The tangency is an interior maximum of the secant slope. A maximum at the near edge
    // only reflects the obstacle next to the anchor, where it is not the true obstacle.
    std::size_t best = n;
    for (std::size_t k = q + 1; k + 1 < n; ++k)
        if (steep(k) >= steep(k - 1) && steep(k) >= steep(k + 1) && (best == n || steep(k) > steep(best))) best = k;
    if (best == n) {
        std::ostringstream os;
        os << "secant slope has no interior maximum; it is largest next to the anchor at x=" << scan[valid[q]].t;
        throw Error(ErrorCode::BracketFailure, "tangency", os.str());
    }

    // Bracket the stationary point of the secant slope, T = 0
    std::size_t lo = best > q ? best - 1 : best, hi = best + 1;
    auto sgn = [&](std::size_t k) { return std::signbit(scan[valid[k]].p.T); };
    int widen = 0;
    while (sgn(lo) == sgn(hi) && widen < 3) {
        if (lo > q) --lo;
        if (hi + 1 < valid.size()) ++hi;
        ++widen;
    }
    if (sgn(lo) == sgn(hi)) {
        std::ostringstream os;
        os << "no sign change of the tangency function around t=" << scan[valid[best]].t;
        throw Error(ErrorCode::BracketFailure, "tangency", os.str());
    }

    auto f = [&](double t) {
        const TransformedPoint p = eval(t);
        return std::pair{p.T, p.dTdx};
    };
    const RootResult root = newton_bisect(f, scan[valid[lo]].t, scan[valid[hi]].t, {1e-15, 0.0, 300});
    const TransformedPoint p = eval(root.x);

    Tangency out;
    out.x = root.x;
    out.y = p.y;
    out.R = p.R;
    out.beta = slope(p);
    out.residual = p.T;
    out.far_end_concave = scan[valid.back()].p.d2R <= 0.0;

    // Any other near-contact of the line with R signals a second tangency
    auto gap = [&](std::size_t k) {
        const auto& s = scan[valid[k]].p;
        const double line = anchor_R + out.beta * (s.y - anchor_y);
        return (line - s.R) / (std::abs(line) + std::abs(s.R) + 1e-300);
    };
    for (std::size_t k = q + 1; k + 1 < valid.size(); ++k) {
        if (k + 2 >= lo && k <= hi + 2) continue;
        const double gk = gap(k);
        if (gk <= 1e-9 && gk <= gap(k - 1) && gk <= gap(k + 1)) {
            std::ostringstream os;
            os << "second contact near x=" << scan[valid[k]].t << " (relative gap " << gk << ") besides x=" << out.x;
            throw Error(ErrorCode::MultipleTangencies, "tangency", os.str());
        }
    }
    return out;
}

TangencyResult tangency(const TransformedObstacle& t, int scan_points) {
    const auto& m = *t.obstacle.model;
    const int regime = t.obstacle.regime;
    const auto xs = scan_states(m, regime, scan_points);
    const auto jets = state_jets_batch(m, regime, xs);
    std::vector<ScanPoint> scan(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k)
        scan[k] = {xs[k], transformed_point(jets[k], t.obstacle.beta_other, t.obstacle.intercept_other, t.anchor_y,
                                            t.anchor_R)};
    auto eval = [&](double x) { return t.at_state(x); };
    return tangency_scan(eval, scan, t.anchor_y, t.anchor_R, regime == kClosed ? 1 : -1);
}

}  // namespace optswitch
