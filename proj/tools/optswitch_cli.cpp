// Command-line front end: solve, verify, simulate, curves

#include "optswitch/config.hpp"
#include "optswitch/error.hpp"
#include "optswitch/oracle.hpp"
#include "optswitch/solver.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace optswitch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::optional<std::int64_t> paths;
    std::optional<double> dt;
    std::vector<double> probes;
};

RunConfig load(const Overrides& o) {
    RunConfig c = load_config(o.config);
    if (!o.out.empty()) c.output.directory = o.out;
    if (o.seed) c.oracle.seed = *o.seed;
    if (o.grid) c.oracle.grid_nodes = *o.grid;
    if (o.paths) c.oracle.paths = *o.paths;
    if (o.dt) c.oracle.dt = *o.dt;
    if (!o.probes.empty()) c.oracle.probes = o.probes;
    if (c.oracle.paths <= 0) throw Error(ErrorCode::ConfigError, "oracle.paths", "at least one path is required");
    if (c.oracle.grid_nodes < 3) throw Error(ErrorCode::ConfigError, "oracle.grid_nodes", "at least three nodes");
    return c;
}

ValidatedProblem problem_of(const RunConfig& c) {
    try {
        return validate_problem(to_problem(c.problem));
    } catch (const Error& e) {
        // Invalid parameters are configuration errors from the CLI's point of view
        throw Error(ErrorCode::ConfigError, e.field(), e.what());
    }
}

Solution run_solver(const RunConfig& c, const ValidatedProblem& p) {
    const SolveOptions opts = to_solve_options(c.solver);
    return c.solver.method == "simultaneous" ? solve_simultaneous(p, opts) : solve(p, opts);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string summary(const Solution& s) {
    std::ostringstream os;
    os << "outcome = " << to_string(s.outcome) << "\n"
       << "method = " << s.method << "\n"
       << "coupling = " << to_string(s.coupling) << "\n"
       << "a_star = " << (s.a_star ? num(*s.a_star) : "none") << "\n"
       << "b_star = " << (s.b_star ? num(*s.b_star) : "none") << "\n"
       << "beta0_star = " << num(s.beta0_star) << "\n"
       << "beta1_star = " << num(s.beta1_star) << "\n"
       << "l_c = " << to_string(s.limits.l_c.kind) << "\n"
       << "l_d = " << to_string(s.limits.l_d.kind) << "\n"
       << "residual = " << num(s.residual) << "\n"
       << "iterations = " << s.iterations << "\n";
    return os.str();
}

std::vector<double> curve_grid(const RunConfig& c, const Solution& s) {
    const auto& p = s.model->problem.problem();
    double lo = c.output.curve_lower, hi = c.output.curve_upper;
    if (!(hi > lo)) {
        // Default: a band around the thresholds
        const double a = s.a_star.value_or(s.b_star.value_or(1.0));
        const double b = s.b_star.value_or(a);
        lo = std::max(p.lower.x, a - 1.0 * (b - a + 1.0));
        hi = b + 1.0 * (b - a + 1.0);
    }
    const int n = std::max(2, c.output.curve_points);
    std::vector<double> xs(n);
    const bool log = c.output.curve_spacing == "log";
    if (log && lo <= 0.0) throw Error(ErrorCode::ConfigError, "output.curve_lower", "log spacing needs a positive lower end");
    for (int k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / (n - 1);
        xs[k] = log ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    return xs;
}

void write_curves(const RunConfig& c, const Solution& s) {
    fs::create_directories(c.output.directory);
    const auto xs = curve_grid(c, s);
    {
        std::ofstream out(fs::path(c.output.directory) / "state_curves.csv");
        out << "x,v0,v1,g0,g1\n";
        for (double x : xs)
            out << num(x) << ',' << num(s.v0(x)) << ',' << num(s.v1(x)) << ',' << num(s.g(kClosed, x)) << ','
                << num(s.g(kOpen, x)) << '\n';
    }
    std::ofstream out(fs::path(c.output.directory) / "transformed_curves.csv");
    out << "y,R,W,regime\n";
    for (int regime = 0; regime < 2; ++regime) {
        const TransformedObstacle t = transform(solution_obstacle(s, regime));
        const Line& line = regime == kClosed ? s.w0_line : s.w1_line;
        for (double x : xs) {
            if (!(x > s.model->window.first && x < s.model->window.second)) continue;
            const TransformedPoint pt = t.at_state(x);
            if (!std::isfinite(pt.y) || !std::isfinite(pt.R)) continue;
            out << num(pt.y) << ',' << num(pt.R) << ',' << num(line(pt.y)) << ',' << regime << '\n';
        }
    }
}

int cmd_solve(const Overrides& o, bool with_summary) {
    const RunConfig c = load(o);
    const ValidatedProblem p = problem_of(c);
    const Solution s = run_solver(c, p);
    write_curves(c, s);
    if (with_summary) {
        const std::string text = summary(s);
        std::ofstream(fs::path(c.output.directory) / "summary.txt") << text;
        std::cout << text;
    } else {
        std::cout << "curves written to " << c.output.directory << "\n";
    }
    return kExitOk;
}

SimulationOptions sim_options(const RunConfig& c) {
    SimulationOptions m;
    m.paths = c.oracle.paths;
    m.dt = c.oracle.dt;
    m.seed = c.oracle.seed;
    return m;
}

int cmd_simulate(const Overrides& o) {
    const RunConfig c = load(o);
    const ValidatedProblem p = problem_of(c);
    const Solution s = run_solver(c, p);
    std::printf("%-10s %-6s %-20s %-12s %-20s %-8s %-10s\n", "x", "regime", "mc_mean", "std_error", "solution", "z",
                "switches");
    for (double x : c.oracle.probes)
        for (int r = 0; r < 2; ++r) {
            const SimulationEstimate e = simulate_policy(p, {s.a_star, s.b_star}, x, r, sim_options(c));
            std::printf("%-10g %-6d %-20.12g %-12.4g %-20.12g %-8.3f %-10.3f\n", x, r, e.mean, e.std_error, s.v(r, x),
                        e.z_score(s.v(r, x)), e.mean_switches);
        }
    return kExitOk;
}

int cmd_verify(const Overrides& o) {
    const RunConfig c = load(o);
    if (c.oracle.probes.empty()) throw Error(ErrorCode::ConfigError, "oracle.probes", "no probe states given");
    const ValidatedProblem p = problem_of(c);
    const Solution s = run_solver(c, p);
    std::cout << summary(s);

    const GridScheme grid = build_grid_scheme(p, to_grid_options(c.oracle));
    const IterationReport vi = value_iteration(p, grid);
    std::printf("value iteration: %d sweeps, converged=%s, monotone=%s\n", vi.iterations, vi.converged ? "yes" : "no",
                vi.monotone ? "yes" : "no");
    bool ok = vi.converged && vi.monotone;
    std::printf("%-10s %-6s %-18s %-18s %-10s %-18s %-10s %-8s %s\n", "x", "regime", "solution", "grid", "grid_gap",
                "mc_mean", "mc_se", "z", "status");
    for (double x : c.oracle.probes)
        for (int r = 0; r < 2; ++r) {
            const double v = s.v(r, x);
            const double gv = vi.value(r, x);
            const double gap = std::abs(gv - v) / std::max(std::abs(v), 1e-12);
            const SimulationEstimate e = simulate_policy(p, {s.a_star, s.b_star}, x, r, sim_options(c));
            const double z = e.z_score(v);
            const bool pass = gap <= c.oracle.grid_tolerance && std::abs(z) <= 3.0;
            ok &= pass;
            std::printf("%-10g %-6d %-18.10g %-18.10g %-10.3e %-18.10g %-10.3e %-8.3f %s\n", x, r, v, gv, gap, e.mean,
                        e.std_error, z, pass ? "ok" : "FAIL");
        }
    std::printf("verification %s\n", ok ? "passed" : "FAILED");
    return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal two-regime switching: thresholds, value functions and verification oracles"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory (overrides [output] directory)");
        sub->add_option("--seed", o.seed, "Random seed");
        sub->add_option("--grid", o.grid, "Value-iteration grid nodes");
        sub->add_option("--paths", o.paths, "Monte Carlo paths");
        sub->add_option("--dt", o.dt, "Monte Carlo time step");
        sub->add_option("--probes", o.probes, "Probe states, comma separated")->delimiter(',');
    };
    auto* solve_cmd = app.add_subcommand("solve", "Solve and write the summary and curve files");
    auto* verify_cmd = app.add_subcommand("verify", "Check the solution against value iteration and Monte Carlo");
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimates of the optimal policy at the probes");
    auto* curves_cmd = app.add_subcommand("curves", "Write state-space and transformed-space curve files");
    for (auto* sub : {solve_cmd, verify_cmd, simulate_cmd, curves_cmd}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*solve_cmd) return cmd_solve(o, true);
        if (*curves_cmd) return cmd_solve(o, false);
        if (*simulate_cmd) return cmd_simulate(o);
        if (*verify_cmd) return cmd_verify(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
            case ErrorCode::ConfigError: return kExitConfig;
            case ErrorCode::NonConvergence:
            case ErrorCode::BracketFailure:
            case ErrorCode::MultipleTangencies:
            case ErrorCode::OrderingViolation:
            case ErrorCode::InconclusiveLimit:
            case ErrorCode::InfiniteValue:
            case ErrorCode::UnsupportedBoundaryLimit:
            case ErrorCode::ResolventDivergence: return kExitSolver;
            default: return kExitFailure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
