#pragma once

namespace optswitch {

/// Hermite function of negative degree,
/// 𝓗_ν(z) = Γ(−ν)⁻¹ ∫₀^∞ exp(−t² − 2tz) t^{−ν−1} dt.
/// Relative accuracy about 1e-12 for |z| ≤ 20, |ν| ≤ 10. Throws DegreeOutOfRange for ν ≥ 0.
double hermite(double nu, double z);

/// log 𝓗_ν(z); avoids overflow for large negative z
double log_hermite(double nu, double z);

/// d/dz 𝓗_ν(z) = 2ν·𝓗_{ν−1}(z)
double hermite_derivative(double nu, double z);

/// Parabolic cylinder function D_ν(z) = 2^{−ν/2} e^{−z²/4} 𝓗_ν(z/√2), ν < 0
double parabolic_cylinder(double nu, double z);

}  // namespace optswitch
