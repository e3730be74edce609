#pragma once

#include "optswitch/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace optswitch {

// ---------------------------------------------------------------------------
// Grid value iteration

enum class GridSpacing { Auto, Uniform, Logarithmic };
enum class DriftDifferencing { Hybrid, Upwind, Central };

std::string_view to_string(GridSpacing s);

struct GridOptions {
    int nodes = 2000;
    GridSpacing spacing = GridSpacing::Auto;  ///< Auto: logarithmic when every regime is GBM
    std::optional<double> lower;              ///< default: family-dependent truncation
    std::optional<double> upper;
    /// Drift differencing: Hybrid uses central differences where both weights stay
    /// nonnegative and upwinding elsewhere; Central throws SchemeUnstable instead
    DriftDifferencing drift = DriftDifferencing::Hybrid;
};

/// Markov-chain approximation of the two generators on a common node set.
/// Interior node j of regime i continues to j±1 with probabilities p_up, p_down and
/// discount factor 1 − p_up − p_down; end nodes carry boundary values.
struct GridScheme {
    GridSpacing spacing = GridSpacing::Uniform;
    std::vector<double> x;
    double h = 0.0;  ///< spacing in the grid coordinate (x or log x)
    std::array<std::vector<double>, 2> p_up, p_down;
    std::array<std::vector<double>, 2> reward;  ///< one-step reward f/(α + rates)
    bool lower_absorbing = false;                ///< node 0 sits on an absorbing endpoint (value 0)
    bool upper_absorbing = false;
    std::array<std::pair<double, double>, 2> boundary_g;  ///< g_i at the two end nodes

    std::size_t size() const { return x.size(); }
    /// Piecewise-linear interpolation in the grid coordinate
    double interpolate(const std::vector<double>& values, double state) const;
};

/// Build the monotone scheme; throws SchemeUnstable when central differencing is forced
/// and a weight would be negative
GridScheme build_grid_scheme(const ValidatedProblem& problem, const GridOptions& opts = {});

struct ValueIterationOptions {
    int max_iterations = 5000;
    double tolerance = 1e-10;  ///< on the sup-norm increment, relative to max(1, sup|v|)
    bool parallel = true;      ///< solve the two stopping problems of a sweep concurrently
    bool keep_history = false;  ///< store every iterate pair
};

/// Alternating optimal-stopping iterates: w_n approximates v₁, y_n approximates v₀
struct IterationReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> w, y;              ///< final iterates on the nodes
    std::vector<double> increments;        ///< sup-norm increment per sweep
    double min_step = 0.0;                 ///< most negative nodewise change seen (monotonicity)
    bool monotone = true;                  ///< every change ≥ −1e-12·max(1, |value|)
    std::vector<std::pair<std::vector<double>, std::vector<double>>> history;  ///< (w_n, y_n)
    GridScheme grid;

    double value(int regime, double state) const {
        return grid.interpolate(regime == kOpen ? w : y, state);
    }
};

/// Jacobi sweeps w_{n+1} = S₁(y_n − H₀), y_{n+1} = S₀(w_n − H₁) from w₀ = g₁, y₀ = g₀,
/// where S_i solves the discrete stopping problem exactly by policy iteration
IterationReport value_iteration(const ValidatedProblem& problem, const GridScheme& grid,
                                const ValueIterationOptions& opts = {});

/// Discrete optimal stopping of one regime against an obstacle (exposed for tests)
std::vector<double> solve_stopping(const GridScheme& grid, int regime, const std::vector<double>& obstacle,
                                   std::pair<double, double> boundary);

// ---------------------------------------------------------------------------
// Monte Carlo policy simulation

/// Switch open → closed at or below a, closed → open at or above b; nullopt: never
struct ThresholdPolicy {
    std::optional<double> a;
    std::optional<double> b;
};

struct SimulationOptions {
    std::int64_t paths = 100000;
    double dt = 1e-3;
    double horizon = 0.0;  ///< 0: until the discount factor drops below 1e-10
    std::uint64_t seed = 20240607;
    int batch_size = 1000;
    bool parallel = true;
    /// Take exact multi-step transitions when a barrier crossing within the step has
    /// probability below ~1e-12 (requires closed-form conditional reward means)
    bool step_skipping = true;
};

struct SimulationEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t paths = 0;
    double dt = 0.0;
    double horizon = 0.0;
    double mean_switches = 0.0;
    std::int64_t max_switches = 0;
    double mean_steps = 0.0;  ///< simulation steps per path
    bool exact_transitions = false;

    double z_score(double reference) const { return std_error > 0.0 ? (mean - reference) / std_error : 0.0; }
};

SimulationEstimate simulate_policy(const ValidatedProblem& problem, const ThresholdPolicy& policy, double x0,
                                   int start_regime, const SimulationOptions& opts = {});

}  // namespace optswitch
