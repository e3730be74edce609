#include "optswitch/oracle.hpp"

#include "optswitch/error.hpp"
#include "optswitch/noswitch.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <sstream>

namespace optswitch {

std::string_view to_string(GridSpacing s) {
    switch (s) {
        case GridSpacing::Auto: return "auto";
        case GridSpacing::Uniform: return "uniform";
        case GridSpacing::Logarithmic: return "logarithmic";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Grid scheme

namespace {

std::pair<double, double> default_grid_domain(const SwitchingProblem& p, GridSpacing spacing) {
    const double c = p.lower.x, d = p.upper.x;
    if (spacing == GridSpacing::Logarithmic) {
        const double lo = p.lower.kind == BoundaryKind::Absorbing && c > 0.0 ? c : std::max(c, 1e-4);
        const double hi = p.upper.kind == BoundaryKind::Absorbing ? d : std::min(d, 1e4);
        return {lo, hi};
    }
    if (p.regimes[0].is_ou() && p.regimes[1].is_ou()) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& r : p.regimes) {
            const auto& ou = std::get<OrnsteinUhlenbeck>(r.family);
            const double sd = ou.vol / std::sqrt(2.0 * ou.speed);
            lo = std::min(lo, ou.level - 8.0 * sd);
            hi = std::max(hi, ou.level + 8.0 * sd);
        }
        if (std::isfinite(c) && (p.lower.kind == BoundaryKind::Absorbing || c > lo)) lo = c;
        if (std::isfinite(d) && (p.upper.kind == BoundaryKind::Absorbing || d < hi)) hi = d;
        return {lo, hi};
    }
    if (p.window) return *p.window;
    if (std::isfinite(c) && std::isfinite(d)) return {c, d};
    throw Error(ErrorCode::InvalidParameter, "grid", "no default grid domain; set grid bounds explicitly");
}

double grid_coordinate(GridSpacing s, double x) { return s == GridSpacing::Logarithmic ? std::log(x) : x; }

/// Thomas algorithm for a tridiagonal system (sub, diag, super), overwriting rhs
void thomas(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

double GridScheme::interpolate(const std::vector<double>& values, double state) const {
    const double s = grid_coordinate(spacing, state);
    const double s0 = grid_coordinate(spacing, x.front());
    const double pos = (s - s0) / h;
    if (!(pos >= -1e-9 && pos <= static_cast<double>(x.size() - 1) + 1e-9)) {
        std::ostringstream os;
        os << "state " << state << " outside the grid [" << x.front() << ", " << x.back() << "]";
        throw Error(ErrorCode::OutOfDomain, "x", os.str());
    }
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(std::max(pos, 0.0)), x.size() - 2);
    const double w = std::clamp(pos - static_cast<double>(j), 0.0, 1.0);
    return (1.0 - w) * values[j] + w * values[j + 1];
}

GridScheme build_grid_scheme(const ValidatedProblem& problem, const GridOptions& opts) {
    const SwitchingProblem& p = problem.problem();
    if (opts.nodes < 3) throw Error(ErrorCode::InvalidParameter, "grid.nodes", "at least three nodes are required");

    GridScheme g;
    g.spacing = opts.spacing;
    if (g.spacing == GridSpacing::Auto)
        g.spacing = p.regimes[0].is_gbm() && p.regimes[1].is_gbm() ? GridSpacing::Logarithmic : GridSpacing::Uniform;

    auto [lo, hi] = default_grid_domain(p, g.spacing);
    if (opts.lower) lo = *opts.lower;
    if (opts.upper) hi = *opts.upper;
    if (!(lo < hi) || lo < p.lower.x || hi > p.upper.x || (g.spacing == GridSpacing::Logarithmic && lo <= 0.0)) {
        std::ostringstream os;
        os << "grid bounds [" << lo << ", " << hi << "] are not inside the state interval";
        throw Error(ErrorCode::InvalidParameter, "grid", os.str());
    }
    g.lower_absorbing = p.lower.kind == BoundaryKind::Absorbing && lo == p.lower.x;
    g.upper_absorbing = p.upper.kind == BoundaryKind::Absorbing && hi == p.upper.x;

    const int n = opts.nodes;
    const double s0 = grid_coordinate(g.spacing, lo), s1 = grid_coordinate(g.spacing, hi);
    g.h = (s1 - s0) / (n - 1);
    g.x.resize(n);
    for (int j = 0; j < n; ++j) {
        const double s = s0 + g.h * j;
        g.x[j] = g.spacing == GridSpacing::Logarithmic ? std::exp(s) : s;
    }
    g.x.front() = lo;
    g.x.back() = hi;

    const double alpha = p.discount;
    const double h = g.h;
    for (int i = 0; i < 2; ++i) {
        const RegimeSpec& r = p.regimes[i];
        g.p_up[i].assign(n, 0.0);
        g.p_down[i].assign(n, 0.0);
        g.reward[i].assign(n, 0.0);
        for (int j = 1; j + 1 < n; ++j) {
            const double x = g.x[j];
            const double mu = r.drift(x), sig = r.vol(x);
            double b = mu, a = sig * sig;
            if (g.spacing == GridSpacing::Logarithmic) {
                b = mu / x - 0.5 * a / (x * x);
                a /= x * x;
            }
            double up = a / (2 * h * h) + b / (2 * h);
            double dn = a / (2 * h * h) - b / (2 * h);
            if (up < 0.0 || dn < 0.0 || opts.drift == DriftDifferencing::Upwind) {
                if (opts.drift == DriftDifferencing::Central) {
                    std::ostringstream os;
                    os << "negative transition weight at x=" << x << " in regime " << i
                       << "; refine the grid or use upwinding";
                    throw Error(ErrorCode::SchemeUnstable, "grid", os.str());
                }
                up = a / (2 * h * h) + std::max(b, 0.0) / h;
                dn = a / (2 * h * h) + std::max(-b, 0.0) / h;
            }
            const double denom = alpha + up + dn;
            g.p_up[i][j] = up / denom;
            g.p_down[i][j] = dn / denom;
            g.reward[i][j] = p.reward[i](x) / denom;
        }
        const NoSwitchValue gi = no_switch_value(problem, i);
        g.boundary_g[i] = {g.lower_absorbing ? 0.0 : gi(lo), g.upper_absorbing ? 0.0 : gi(hi)};
    }
    return g;
}

// ---------------------------------------------------------------------------
// Value iteration

std::vector<double> solve_stopping(const GridScheme& grid, int regime, const std::vector<double>& obstacle,
                                   std::pair<double, double> boundary) {
    const std::size_t n = grid.size();
    const auto& pu = grid.p_up[regime];
    const auto& pd = grid.p_down[regime];
    const auto& rw = grid.reward[regime];
    std::vector<char> stop(n, 0), next(n, 0);
    std::vector<double> sub(n), diag(n), sup(n), v(n);
    for (int it = 0; it < 10000; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            sub[j] = sup[j] = 0.0;
            diag[j] = 1.0;
            if (j == 0) {
                v[j] = boundary.first;
            } else if (j + 1 == n) {
                v[j] = boundary.second;
            } else if (stop[j]) {
                v[j] = obstacle[j];
            } else {
                sub[j] = -pd[j];
                sup[j] = -pu[j];
                v[j] = rw[j];
            }
        }
        thomas(sub, diag, sup, v);
        bool changed = false;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double cont = rw[j] + pu[j] * v[j + 1] + pd[j] * v[j - 1];
            const double eps = 1e-14 * (std::abs(cont) + std::abs(obstacle[j]));
            next[j] = stop[j] ? obstacle[j] >= cont - eps : obstacle[j] > cont + eps;
            changed |= next[j] != stop[j];
        }
        if (!changed) return v;
        stop.swap(next);
    }
    throw Error(ErrorCode::NonConvergence, "policy_iteration", "discrete stopping problem did not settle");
}

IterationReport value_iteration(const ValidatedProblem& problem, const GridScheme& grid,
                                const ValueIterationOptions& opts) {
    const SwitchingProblem& p = problem.problem();
    const std::size_t n = grid.size();
    IterationReport rep;
    rep.grid = grid;

    std::vector<double> h_close(n), h_open(n);
    for (std::size_t j = 0; j < n; ++j) {
        h_close[j] = p.cost_close(grid.x[j]);
        h_open[j] = p.cost_open(grid.x[j]);
    }
    const std::vector<double> never(n, -std::numeric_limits<double>::infinity());
    auto ends = [&](int regime, const std::vector<double>& obs) {
        const auto [g_lo, g_hi] = grid.boundary_g[regime];
        return std::pair{grid.lower_absorbing ? 0.0 : std::max(g_lo, obs.front()),
                         grid.upper_absorbing ? 0.0 : std::max(g_hi, obs.back())};
    };

    // n = 0: the no-switch values of the chain
    std::vector<double> w = solve_stopping(grid, kOpen, never, ends(kOpen, never));
    std::vector<double> y = solve_stopping(grid, kClosed, never, ends(kClosed, never));
    if (opts.keep_history) rep.history.emplace_back(w, y);

    std::vector<double> obs1(n), obs0(n), wn, yn;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            obs1[j] = y[j] - h_close[j];
            obs0[j] = w[j] - h_open[j];
        }
        std::exception_ptr failure;
#pragma omp parallel sections num_threads(2) if (opts.parallel)
        {
#pragma omp section
            {
                try {
                    wn = solve_stopping(grid, kOpen, obs1, ends(kOpen, obs1));
                } catch (...) {
#pragma omp critical
                    failure = std::current_exception();
                }
            }
#pragma omp section
            {
                try {
                    yn = solve_stopping(grid, kClosed, obs0, ends(kClosed, obs0));
                } catch (...) {
#pragma omp critical
                    failure = std::current_exception();
                }
            }
        }
        if (failure) std::rethrow_exception(failure);

        double inc = 0.0, scale = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double dw = wn[j] - w[j], dy = yn[j] - y[j];
            inc = std::max({inc, std::abs(dw), std::abs(dy)});
            scale = std::max({scale, std::abs(wn[j]), std::abs(yn[j])});
            rep.min_step = std::min({rep.min_step, dw, dy});
            if (dw < -1e-12 * std::max(1.0, std::abs(w[j])) || dy < -1e-12 * std::max(1.0, std::abs(y[j])))
                rep.monotone = false;
        }
        w.swap(wn);
        y.swap(yn);
        rep.increments.push_back(inc);
        rep.iterations = it;
        if (opts.keep_history) rep.history.emplace_back(w, y);
        if (inc <= opts.tolerance * scale) {
            rep.converged = true;
            break;
        }
    }
    rep.w = std::move(w);
    rep.y = std::move(y);
    return rep;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

/// ∫₀^Δ e^{−rate·s} ds
double discounted_time(double rate, double dt) {
    return std::abs(rate * dt) < 1e-12 ? dt : -std::expm1(-rate * dt) / rate;
}

/// Step-size dependent constants of one regime, tabulated for Δ = dt·2^e
struct StepConstants {
    double dt = 0.0;
    double discount = 0.0;  ///< e^{−αΔ}
    std::array<double, 3> time{};  ///< discounted time integrals for the reward terms
    double shift = 0.0;     ///< GBM: log drift·Δ; OU: e^{−kΔ}
    double spread = 0.0;    ///< standard deviation of the Gaussian increment
    double exc_linear = 0.0;  ///< excursion bound = exc_linear·|x − level| + exc_const
    double exc_const = 0.0;
};

/// One regime's exact (or Euler) dynamics with the matching reward integral
class RegimeStepper {
public:
    /// z-score of the excursion bound; crossing probability per skipped step ≲ 2e-9
    static constexpr double kZ = 6.0;
    static constexpr int kLevels = 40;

    RegimeStepper(const RegimeSpec& r, const Reward& f, double alpha, double dt) : spec_(&r), reward_(&f), alpha_(alpha) {
        gbm_ = std::get_if<GeometricBM>(&r.family);
        ou_ = std::get_if<OrnsteinUhlenbeck>(&r.family);
        exact_reward_ = !f.custom && (gbm_ || (ou_ && f.power_coef == 0.0));
        for (int e = 0; e < kLevels; ++e) table_.push_back(constants(dt * std::ldexp(1.0, e)));
    }

    bool exact() const { return gbm_ || ou_; }
    bool exact_reward() const { return exact_reward_; }
    const StepConstants& level(int e) const { return table_[e]; }

    StepConstants constants(double dt) const {
        StepConstants k;
        k.dt = dt;
        k.discount = std::exp(-alpha_ * dt);
        k.time[0] = discounted_time(alpha_, dt);
        if (gbm_) {
            const double s2 = gbm_->vol * gbm_->vol;
            const double q = reward_->power_exp;
            k.time[1] = discounted_time(alpha_ - gbm_->drift, dt);
            k.time[2] = discounted_time(alpha_ - (q * gbm_->drift + 0.5 * s2 * q * (q - 1.0)), dt);
            k.shift = (gbm_->drift - 0.5 * s2) * dt;
            k.spread = gbm_->vol * std::sqrt(dt);
            k.exc_const = std::abs(k.shift) + kZ * k.spread;
        } else if (ou_) {
            k.time[1] = discounted_time(alpha_ + ou_->speed, dt);
            k.shift = std::exp(-ou_->speed * dt);
            k.spread = ou_->vol * std::sqrt(-std::expm1(-2.0 * ou_->speed * dt) / (2.0 * ou_->speed));
            // Time-changed martingale bound on the stochastic part, monotone drift part
            k.exc_linear = -std::expm1(-ou_->speed * dt);
            k.exc_const = kZ * ou_->vol * std::sqrt(std::expm1(2.0 * ou_->speed * dt) / (2.0 * ou_->speed));
        } else {
            k.spread = std::sqrt(dt);
        }
        return k;
    }

    /// E ∫₀^Δ e^{−αs} f(X_s) ds given X₀ = x (left-point rule without a closed form)
    double reward_mean(double x, const StepConstants& k) const {
        const Reward& f = *reward_;
        if (!exact_reward_) return f(x) * k.time[0];
        if (gbm_) {
            double m = f.constant * k.time[0] + f.linear * x * k.time[1];
            if (f.power_coef != 0.0) m += f.power_coef * std::pow(x, f.power_exp) * k.time[2];
            return m;
        }
        return (f.constant + f.linear * ou_->level) * k.time[0] + f.linear * (x - ou_->level) * k.time[1];
    }

    double sample(double x, const StepConstants& k, double z) const {
        if (gbm_) return x * std::exp(k.shift + k.spread * z);
        if (ou_) return ou_->level + (x - ou_->level) * k.shift + k.spread * z;
        return x + spec_->drift(x) * k.dt + spec_->vol(x) * k.spread * z;
    }

    /// Distance to the nearest barrier in the coordinate of the excursion bound
    double distance(double x, const std::vector<double>& barriers) const {
        double d = std::numeric_limits<double>::infinity();
        for (double b : barriers) d = std::min(d, gbm_ ? std::abs(std::log(x / b)) : std::abs(x - b));
        return d;
    }

    double excursion(double x, const StepConstants& k) const {
        return ou_ ? k.exc_linear * std::abs(x - ou_->level) + k.exc_const : k.exc_const;
    }

private:
    const RegimeSpec* spec_;
    const Reward* reward_;
    double alpha_;
    const GeometricBM* gbm_ = nullptr;
    const OrnsteinUhlenbeck* ou_ = nullptr;
    bool exact_reward_ = false;
    std::vector<StepConstants> table_;
};

struct BatchStats {
    std::int64_t n = 0;
    double mean = 0.0, m2 = 0.0;
    double switches = 0.0;
    std::int64_t max_switches = 0;
    double steps = 0.0;
};

}  // namespace

SimulationEstimate simulate_policy(const ValidatedProblem& problem, const ThresholdPolicy& policy, double x0,
                                   int start_regime, const SimulationOptions& opts) {
    const SwitchingProblem& p = problem.problem();
    if (opts.paths <= 0) throw Error(ErrorCode::InvalidParameter, "paths", "at least one path is required");
    if (!(opts.dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "dt", "time step must be positive");
    if (opts.batch_size <= 0) throw Error(ErrorCode::InvalidParameter, "batch_size", "must be positive");
    if (start_regime != kClosed && start_regime != kOpen)
        throw Error(ErrorCode::InvalidParameter, "start_regime", "must be 0 or 1");
    if (!(x0 > p.lower.x && x0 < p.upper.x)) throw Error(ErrorCode::OutOfDomain, "x0", "start state outside (c, d)");
    if (policy.a && policy.b && !(*policy.a < *policy.b))
        throw Error(ErrorCode::InvalidParameter, "policy", "thresholds must satisfy a < b");

    const double alpha = p.discount;
    const double t_trunc = std::log(1e10) / alpha;
    const double horizon = opts.horizon > 0.0 ? std::min(opts.horizon, t_trunc) : t_trunc;
    const std::array<RegimeStepper, 2> stepper{RegimeStepper(p.regimes[0], p.reward[0], alpha, opts.dt),
                                               RegimeStepper(p.regimes[1], p.reward[1], alpha, opts.dt)};
    std::array<bool, 2> skip{};
    std::array<std::vector<double>, 2> barriers;
    for (int r = 0; r < 2; ++r) {
        skip[r] = opts.step_skipping && stepper[r].exact() && stepper[r].exact_reward();
        if (r == kClosed && policy.b) barriers[r].push_back(*policy.b);
        if (r == kOpen && policy.a) barriers[r].push_back(*policy.a);
        if (p.lower.kind == BoundaryKind::Absorbing) barriers[r].push_back(p.lower.x);
        if (p.upper.kind == BoundaryKind::Absorbing && std::isfinite(p.upper.x)) barriers[r].push_back(p.upper.x);
    }

    const std::int64_t batches = (opts.paths + opts.batch_size - 1) / opts.batch_size;
    std::vector<BatchStats> stats(batches);
    std::exception_ptr failure;

    auto run_batch = [&](std::int64_t bi) {
        std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                          static_cast<std::uint32_t>(bi), static_cast<std::uint32_t>(bi >> 32)};
        std::mt19937_64 rng(seq);
        boost::random::normal_distribution<double> normal;
        const std::int64_t first = bi * opts.batch_size;
        const std::int64_t count = std::min<std::int64_t>(opts.batch_size, opts.paths - first);
        BatchStats s;
        for (std::int64_t k = 0; k < count; ++k) {
            double x = x0, t = 0.0, disc = 1.0, total = 0.0;
            int r = start_regime, level = 0;
            std::int64_t switches = 0, steps = 0;
            while (t < horizon * (1.0 - 1e-12)) {
                if (r == kClosed && policy.b && x >= *policy.b) {
                    total -= disc * p.cost_open(x);
                    r = kOpen;
                    ++switches;
                } else if (r == kOpen && policy.a && x <= *policy.a) {
                    total -= disc * p.cost_close(x);
                    r = kClosed;
                    ++switches;
                }
                if ((p.lower.kind == BoundaryKind::Absorbing && x <= p.lower.x) ||
                    (p.upper.kind == BoundaryKind::Absorbing && x >= p.upper.x))
                    break;
                const RegimeStepper& st = stepper[r];
                const double remaining = horizon - t;
                int e = 0;
                if (skip[r]) {
                    // Step sizes grow by at most one doubling per step; shrink as needed
                    const double dist = st.distance(x, barriers[r]);
                    e = std::min(level + 1, RegimeStepper::kLevels - 1);
                    while (e > 0 && (st.level(e).dt > remaining || st.excursion(x, st.level(e)) > dist)) --e;
                    level = e;
                }
                StepConstants tail;
                const StepConstants* kc = &st.level(e);
                if (kc->dt > remaining) {
                    tail = st.constants(remaining);
                    kc = &tail;
                }
                total += disc * st.reward_mean(x, *kc);
                x = st.sample(x, *kc, normal(rng));
                t += kc->dt;
                disc *= kc->discount;
                ++steps;
            }
            ++s.n;
            const double delta = total - s.mean;
            s.mean += delta / static_cast<double>(s.n);
            s.m2 += delta * (total - s.mean);
            s.switches += static_cast<double>(switches);
            s.max_switches = std::max(s.max_switches, switches);
            s.steps += static_cast<double>(steps);
        }
        stats[bi] = s;
    };

#pragma omp parallel for schedule(dynamic) if (opts.parallel)
    for (std::int64_t bi = 0; bi < batches; ++bi) {
        try {
            run_batch(bi);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    // Combine batch moments in batch order so the result is independent of scheduling
    BatchStats all;
    for (const BatchStats& s : stats) {
        const std::int64_t n = all.n + s.n;
        const double delta = s.mean - all.mean;
        all.mean += delta * static_cast<double>(s.n) / static_cast<double>(n);
        all.m2 += s.m2 + delta * delta * static_cast<double>(all.n) * static_cast<double>(s.n) / static_cast<double>(n);
        all.n = n;
        all.switches += s.switches;
        all.max_switches = std::max(all.max_switches, s.max_switches);
        all.steps += s.steps;
    }

    SimulationEstimate est;
    est.paths = all.n;
    est.mean = all.mean;
    est.std_error = all.n > 1 ? std::sqrt(all.m2 / static_cast<double>(all.n - 1) / static_cast<double>(all.n)) : 0.0;
    est.dt = opts.dt;
    est.horizon = horizon;
    est.mean_switches = all.switches / static_cast<double>(all.n);
    est.max_switches = all.max_switches;
    est.mean_steps = all.steps / static_cast<double>(all.n);
    est.exact_transitions = stepper[0].exact() && stepper[1].exact();
    return est;
}

}  // namespace optswitch
