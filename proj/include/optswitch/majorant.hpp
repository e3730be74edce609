#pragma once

#include "optswitch/fundamentals.hpp"
#include "optswitch/jet.hpp"
#include "optswitch/model.hpp"
#include "optswitch/noswitch.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace optswitch {

struct ModelOptions {
    NumericFundamentalsOptions numeric;
    NoSwitchOptions noswitch;
};

/// Fundamentals, no-switch values and computational window of a validated problem
struct SwitchingModel {
    ValidatedProblem problem;
    std::array<Fundamentals, 2> fund;
    std::array<NoSwitchValue, 2> g;
    std::pair<double, double> window;

    /// β-free obstacle part: K₀ = g₁ − g₀ − H(·,1), K₁ = g₀ − g₁ − H(·,0)
    Jet K(int regime, double x) const;
    /// Transform numerator / denominator: regime 0 uses (ψ₀, φ₀), regime 1 uses (−φ₁, ψ₁)
    std::pair<Jet, Jet> transform_pair(int regime, double x) const;
    /// Function multiplied by the opposing slope: −φ₁ for regime 0, ψ₀ for regime 1
    Jet slope_basis(int regime, double x) const;
    /// Function multiplied by the opposing line's intercept: ψ₁ for regime 0, φ₀ for regime 1
    Jet intercept_basis(int regime, double x) const;

    /// Anchor of the regime's majorant in its transformed coordinate
    std::pair<double, double> anchor(int regime) const;
};

std::shared_ptr<const SwitchingModel> build_model(const ValidatedProblem& problem, const ModelOptions& opts = {});

// ---------------------------------------------------------------------------
// Boundary limits

enum class LimitKind { Zero, FinitePositive, Infinite, NotApplicable };

std::string_view to_string(LimitKind kind);

struct LimitClass {
    LimitKind kind = LimitKind::NotApplicable;
    double value = 0.0;
    /// Audit trail: (x, obstacle ratio, fundamental ratio) along the approach
    std::vector<std::array<double, 3>> sequence;
};

struct BoundaryLimits {
    LimitClass l_c;
    LimitClass l_d;
};

/// Classify l_c and l_d from the sufficient-condition ratios along 40 geometric
/// points approaching each natural endpoint. Throws InconclusiveLimit.
BoundaryLimits classify_boundary_limits(const SwitchingModel& model);

// ---------------------------------------------------------------------------
// Obstacles

/// r = K + β·basis (+ intercept·intercept_basis for the anchored coupling)
struct Obstacle {
    std::shared_ptr<const SwitchingModel> model;
    int regime = 0;
    double beta_other = 0.0;
    double intercept_other = 0.0;

    Jet K_part(double x) const { return model->K(regime, x); }
    Jet r(double x) const;
    /// (𝒜_regime − α) r at x
    double generator_residual(double x) const;
};

Obstacle build_obstacle(std::shared_ptr<const SwitchingModel> model, int regime, double beta_other,
                        double intercept_other = 0.0);

/// Transformed obstacle quantities at one state
struct TransformedPoint {
    double x = 0.0;
    double y = 0.0;       ///< transformed coordinate
    double R = 0.0;       ///< r / denominator
    double dR = 0.0;      ///< dR/dy
    double d2R = 0.0;     ///< d²R/dy²
    double dydx = 0.0;
    double T = 0.0;       ///< R′(y)(y − y_A) − (R − R_A)
    double dTdx = 0.0;
};

/// R in the transformed coordinate with its anchor
struct TransformedObstacle {
    Obstacle obstacle;
    double anchor_y = 0.0;
    double anchor_R = 0.0;
    std::pair<double, double> domain;  ///< (anchor coordinate, far coordinate)

    TransformedPoint at_state(double x) const;
    /// R(y) through the inverse transform
    double R(double y) const;
    double state_of(double y) const;
};

TransformedObstacle transform(const Obstacle& obstacle);

/// β-independent jets at one state, cached by the solver's scan
struct StateJets {
    double x = 0.0;
    Jet N, D;          ///< transform numerator and denominator
    Jet K;             ///< β-free obstacle part
    Jet slope;         ///< slope basis
    Jet intercept;     ///< intercept basis
    double drift = 0.0;
    double var = 0.0;  ///< σ²
    double alpha = 0.0;
};

StateJets state_jets(const SwitchingModel& model, int regime, double x);

/// Transformed quantities for r = K + β·slope + c·intercept relative to the anchor
TransformedPoint transformed_point(const StateJets& s, double beta, double intercept, double anchor_y,
                                   double anchor_R);

/// State jets on a list of states; the parallel variant distributes points over threads
std::vector<StateJets> state_jets_batch(const SwitchingModel& model, int regime, const std::vector<double>& xs,
                                        bool parallel = true);

/// Sign of (𝒜 − α)r, equal to the sign of R″; zero when |·| ≤ 1e-9·scale
int concavity_sign(const Obstacle& obstacle, double x);

// ---------------------------------------------------------------------------
// Tangency

struct Tangency {
    double x = 0.0;
    double y = 0.0;
    double beta = 0.0;
    double R = 0.0;
    double residual = 0.0;
    bool far_end_concave = true;
};

struct NoSwitchSignal {
    bool beyond_window = false;  ///< the supremum sits at the edge of the computational window
};

using TangencyResult = std::variant<Tangency, NoSwitchSignal>;

/// Generic tangency search along an ordered scan parameter t (nearest-to-anchor first).
/// eval(t) must return y, R, dR/dy and dT/dt; sign = +1 maximises the secant slope
/// (majorant to the right of the anchor), −1 minimises it (majorant to the left).
struct ScanPoint {
    double t = 0.0;
    TransformedPoint p;
};

TangencyResult tangency_scan(const std::function<TransformedPoint(double)>& eval, const std::vector<ScanPoint>& scan,
                             double anchor_y, double anchor_R, int sign);

/// Tangency of a transformed obstacle on a scan of the computational window
TangencyResult tangency(const TransformedObstacle& transformed, int scan_points = 200);

/// Scan states for a regime, ordered from the anchor side outward
std::vector<double> scan_states(const SwitchingModel& model, int regime, int count);

}  // namespace optswitch
