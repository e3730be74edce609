#pragma once

#include "optswitch/model.hpp"
#include "optswitch/oracle.hpp"
#include "optswitch/solver.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace optswitch {

/// One regime as written in a config file (GBM or OU only)
struct RegimeConfig {
    std::string family = "gbm";  ///< "gbm" or "ou"
    double drift = 0.0;          ///< gbm
    double speed = 0.0;          ///< ou
    double level = 0.0;          ///< ou
    double vol = 0.0;
    double reward_constant = 0.0;
    double reward_linear = 0.0;
    double reward_power_coef = 0.0;
    double reward_power_exp = 0.0;

    bool operator==(const RegimeConfig&) const = default;
};

struct ProblemConfig {
    std::array<RegimeConfig, 2> regimes;
    double cost_open = 0.0;
    double cost_close = 0.0;
    double discount = 0.0;
    double lower = 0.0;
    std::string lower_kind = "natural";
    double upper = std::numeric_limits<double>::infinity();
    std::string upper_kind = "natural";

    bool operator==(const ProblemConfig&) const = default;
};

struct SolverConfig {
    std::string method = "fixed_point";  ///< "fixed_point" or "simultaneous"
    std::string coupling = "slope_only";  ///< "slope_only" or "anchored"
    double tolerance = 1e-10;
    int max_iterations = 200;
    std::optional<double> initial_beta1;
    int scan_points = 200;

    bool operator==(const SolverConfig&) const = default;
};

struct OracleConfig {
    int grid_nodes = 2000;
    std::optional<double> grid_lower;
    std::optional<double> grid_upper;
    double grid_tolerance = 0.01;  ///< relative gap accepted by verify
    std::int64_t paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 20240607;
    std::vector<double> probes;

    bool operator==(const OracleConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    double curve_lower = 0.0;
    double curve_upper = 0.0;
    int curve_points = 401;
    std::string curve_spacing = "uniform";  ///< "uniform" or "log"

    bool operator==(const OutputConfig&) const = default;
};

/// Complete run description; sections [problem], [regime0], [regime1], [solver], [oracle], [output]
struct RunConfig {
    ProblemConfig problem;
    SolverConfig solver;
    OracleConfig oracle;
    OutputConfig output;

    bool operator==(const RunConfig&) const = default;
};

/// Parse INI text; throws Error(ConfigError) naming the key and line
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Serialize with 17 significant digits; parse_config(serialize_config(c)) == c
std::string serialize_config(const RunConfig& config);

SwitchingProblem to_problem(const ProblemConfig& config);
SolveOptions to_solve_options(const SolverConfig& config);
GridOptions to_grid_options(const OracleConfig& config);

}  // namespace optswitch
