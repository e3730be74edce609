#pragma once

#include "optswitch/jet.hpp"

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace optswitch {

inline constexpr int kClosed = 0;
inline constexpr int kOpen = 1;

/// dX = drift·X dt + vol·X dW
struct GeometricBM {
    double drift = 0.0;
    double vol = 0.0;
};

/// dX = speed·(level − X) dt + vol dW
struct OrnsteinUhlenbeck {
    double speed = 0.0;
    double level = 0.0;
    double vol = 0.0;
};

/// Arbitrary coefficients; the caller asserts integrability of the reward
struct CustomDiffusion {
    std::function<double(double)> drift;
    std::function<double(double)> vol;
};

using Family = std::variant<GeometricBM, OrnsteinUhlenbeck, CustomDiffusion>;

/// One diffusion regime
struct RegimeSpec {
    Family family;

    double drift(double x) const;
    double vol(double x) const;

    /// (𝒜 − α)u from the jet of u
    double generator_minus(double x, const Jet& u, double alpha) const {
        const double s = vol(x);
        return 0.5 * s * s * u.d2 + drift(x) * u.d1 - alpha * u.v;
    }

    bool is_gbm() const { return std::holds_alternative<GeometricBM>(family); }
    bool is_ou() const { return std::holds_alternative<OrnsteinUhlenbeck>(family); }
    bool is_custom() const { return std::holds_alternative<CustomDiffusion>(family); }
};

/// Running reward f(x) = constant + linear·x + power_coef·x^power_exp (+ custom(x))
struct Reward {
    double constant = 0.0;
    double linear = 0.0;
    double power_coef = 0.0;
    double power_exp = 0.0;
    std::function<double(double)> custom;

    double operator()(double x) const;
    bool is_affine() const { return power_coef == 0.0 && !custom; }
    bool is_zero() const { return is_affine() && constant == 0.0 && linear == 0.0; }
    Reward scaled(double k) const;
};

/// Switching cost H(x, ·); constant unless a custom function is supplied
struct Cost {
    double constant = 0.0;
    std::function<double(double)> custom;

    double operator()(double x) const { return custom ? custom(x) : constant; }
    /// Derivatives by central differences for custom costs, exact for constants
    Jet jet(double x) const;
    Cost scaled(double k) const;
};

enum class BoundaryKind { Natural, Absorbing };

struct Endpoint {
    double x = 0.0;
    BoundaryKind kind = BoundaryKind::Natural;
};

/// Two-regime switching problem; regime 0 is closed, regime 1 is open
struct SwitchingProblem {
    std::array<RegimeSpec, 2> regimes;
    std::array<Reward, 2> reward;
    Cost cost_open;   ///< H(x, 1): paid when switching closed → open
    Cost cost_close;  ///< H(x, 0): paid when switching open → closed
    double discount = 0.0;
    Endpoint lower{0.0, BoundaryKind::Natural};
    Endpoint upper{std::numeric_limits<double>::infinity(), BoundaryKind::Natural};
    /// Computational window; required for custom regimes on unbounded intervals
    std::optional<std::pair<double, double>> window;

    /// H(x, regime): cost of switching into the given regime
    const Cost& cost_into(int regime) const { return regime == kOpen ? cost_open : cost_close; }
};

/// A problem whose standing assumptions have been checked; immutable and shareable
class ValidatedProblem {
public:
    const SwitchingProblem& problem() const { return *problem_; }
    const SwitchingProblem* operator->() const { return problem_.get(); }

    /// Fundamentals available in closed form (GBM, OU)
    bool closed_form_fundamentals(int regime) const { return closed_fund_[regime]; }
    /// No-switch value available in closed form
    bool closed_form_noswitch(int regime) const { return closed_g_[regime]; }

private:
    friend ValidatedProblem validate_problem(const SwitchingProblem&);
    std::shared_ptr<const SwitchingProblem> problem_;
    std::array<bool, 2> closed_fund_{};
    std::array<bool, 2> closed_g_{};
};

/// Check the standing assumptions; throws Error naming the offending field
ValidatedProblem validate_problem(const SwitchingProblem& problem);
inline ValidatedProblem validate_problem(const ValidatedProblem& problem) { return problem; }

/// Jointly scale rewards and costs by k
SwitchingProblem scale_rewards_and_costs(const SwitchingProblem& problem, double k);

}  // namespace optswitch
