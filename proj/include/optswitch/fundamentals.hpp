#pragma once

#include "optswitch/jet.hpp"
#include "optswitch/model.hpp"

#include <memory>
#include <utility>
#include <variant>

namespace optswitch {

/// ψ = x^{nu_plus}, φ = x^{nu_minus}
struct GbmExponents {
    double nu_plus = 0.0;
    double nu_minus = 0.0;
};

/// ψ = 2^{−ν/2}𝓗_ν(−scale·(x − center)), φ = 2^{−ν/2}𝓗_ν(scale·(x − center))
struct OuCylinder {
    double nu = 0.0;
    double center = 0.0;
    double scale = 0.0;
};

using ClosedForm = std::variant<std::monostate, GbmExponents, OuCylinder>;

/// Options for numerically integrated fundamentals of custom regimes
struct NumericFundamentalsOptions {
    int nodes = 4001;
    double tolerance = 1e-12;
};

/// Increasing (ψ) and decreasing (φ) solutions of (𝒜 − α)u = 0 for one regime,
/// together with the transforms F = ψ/φ and G = −φ/ψ. Immutable and shareable.
class Fundamentals {
public:
    struct Impl;

    Fundamentals() = default;
    explicit Fundamentals(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    int regime() const;
    const ClosedForm& closed_form() const;
    const RegimeSpec& spec() const;
    double discount() const;

    /// Range of states where ψ, φ and both transforms are finite and nonzero
    std::pair<double, double> range() const;

    Jet psi(double x) const;
    Jet phi(double x) const;
    /// ψ and φ together; cheaper than two calls for some families
    std::pair<Jet, Jet> both(double x) const;

    double F(double x) const;
    double G(double x) const;
    /// dF/dx and dG/dx
    double dF(double x) const;
    double dG(double x) const;
    double F_inverse(double y) const;
    double G_inverse(double y) const;

    /// F(c+): exactly 0 at a natural lower endpoint, F(c) at an absorbing one
    double F_at_lower() const;
    /// G(d−): exactly 0 at a natural upper endpoint, G(d) at an absorbing one
    double G_at_upper() const;

private:
    std::shared_ptr<const Impl> impl_;
};

Fundamentals build_fundamentals(const ValidatedProblem& problem, int regime,
                                const NumericFundamentalsOptions& opts = {});

/// Roots (ν₊, ν₋) of ½σ²n(n−1) + μn − α = 0
GbmExponents gbm_exponents(double drift, double vol, double discount);

/// Common computational window of both regimes, clipped to the problem's window
std::pair<double, double> computational_window(const ValidatedProblem& problem, const Fundamentals& f0,
                                               const Fundamentals& f1);

}  // namespace optswitch
