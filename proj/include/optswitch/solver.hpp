#pragma once

#include "optswitch/majorant.hpp"
#include "optswitch/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace optswitch {

/// How the opposing regime's value enters each obstacle.
/// SlopeOnly: r = K + β·basis (the obstacle form used for the published examples).
/// Anchored: also carries the opposing line's intercept, which differs from SlopeOnly
/// only when an endpoint is absorbing.
enum class Coupling { SlopeOnly, Anchored };

std::string_view to_string(Coupling c);

struct SolveOptions {
    double tolerance = 1e-10;             ///< on |β₁ − β₁′| / (1 + |β₁|)
    int max_iterations = 200;
    std::optional<double> initial_beta1;  ///< default 0 (start from never closing)
    Coupling coupling = Coupling::SlopeOnly;
    int scan_points = 200;
    bool parallel_scan = true;
    /// Skip numerical classification of l_c, l_d and assume zero limits (custom regimes)
    bool assume_zero_limits = false;
    /// Initial thresholds for solve_simultaneous; default from one tangency pass
    std::optional<std::pair<double, double>> initial_thresholds;
    ModelOptions model;
};

enum class Outcome { Switching, NoSwitchEverywhere };

std::string_view to_string(Outcome o);

/// Majorant line W(y) = slope·y + intercept in a regime's transformed coordinate
struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double anchor_y = 0.0;
    double anchor_R = 0.0;
    double operator()(double y) const { return slope * y + intercept; }
};

struct Solution {
    std::shared_ptr<const SwitchingModel> model;
    Outcome outcome = Outcome::Switching;
    Coupling coupling = Coupling::SlopeOnly;
    std::optional<double> a_star;  ///< open → closed at or below (none: never closes)
    std::optional<double> b_star;  ///< closed → open at or above (none: never opens)
    double beta0_star = 0.0;
    double beta1_star = 0.0;
    Line w0_line, w1_line;
    BoundaryLimits limits;
    int iterations = 0;
    double residual = 0.0;           ///< max |T| of both tangency equations at the solution
    std::vector<double> beta1_trace;  ///< β₁ iterates of the fixed-point map
    std::string method;

    double v(int regime, double x) const;
    double v0(double x) const { return v(kClosed, x); }
    double v1(double x) const { return v(kOpen, x); }
    double g(int regime, double x) const { return model->g[regime](x); }
};

/// Coupled fixed-point iteration of the two tangency maps
Solution solve(const ValidatedProblem& problem, const SolveOptions& opts = {});

/// Damped two-dimensional Newton iteration on the pair of tangency equations in (a, b)
Solution solve_simultaneous(const ValidatedProblem& problem, const SolveOptions& opts = {});

/// Value of the given regime at x; at x = a* or b* the continuation-side branch is used
double evaluate_value(const Solution& solution, int regime, double x);

/// The obstacle of one regime at the solution's slopes (and coupling)
Obstacle solution_obstacle(const Solution& solution, int regime);

}  // namespace optswitch
