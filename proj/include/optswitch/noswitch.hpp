#pragma once

#include "optswitch/fundamentals.hpp"
#include "optswitch/jet.hpp"
#include "optswitch/model.hpp"

#include <functional>
#include <memory>
#include <string>

namespace optswitch {

struct NoSwitchOptions {
    bool force_quadrature = false;  ///< use the resolvent quadrature even when a closed form exists
    int cells = 800;                ///< quadrature cells across the computational range
};

/// Expected discounted running reward when the regime is never left
class NoSwitchValue {
public:
    NoSwitchValue() = default;
    NoSwitchValue(int regime, std::string method, std::function<Jet(double)> eval)
        : regime_(regime), method_(std::move(method)), eval_(std::move(eval)) {}

    int regime() const { return regime_; }
    /// "zero", "gbm-closed-form", "ou-closed-form" or "resolvent-quadrature"
    const std::string& method() const { return method_; }
    bool closed_form() const { return method_ != "resolvent-quadrature"; }

    Jet jet(double x) const { return eval_(x); }
    double operator()(double x) const { return eval_(x).v; }

private:
    int regime_ = 0;
    std::string method_;
    std::function<Jet(double)> eval_;
};

NoSwitchValue no_switch_value(const ValidatedProblem& problem, int regime, const Fundamentals& fund,
                              const NoSwitchOptions& opts = {});
NoSwitchValue no_switch_value(const ValidatedProblem& problem, int regime);

}  // namespace optswitch
