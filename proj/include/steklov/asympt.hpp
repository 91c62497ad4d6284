#pragma once

// High-frequency expansion of the Steklov spectrum:
//   σ ~ (d−2) f'(0)/f(0)³ + κ/f(0)² + Σ_j β_j(0) κ^{−j−1}/f(0)²,
// with β_j obtained from the Taylor jet of q at 0.

#include <span>
#include <vector>

#include "steklov/spectrum.hpp"

namespace steklov {

struct BetaCoefficients {
    std::vector<double> beta;  ///< β_0(0), …, β_N(0)
};

/// Coefficients of M(−κ²) = −κ − Σ β_j(0) κ^{−j−1} + O(κ^{−N−2}), from the
/// Riccati equation for m = −κ − w: 2β_{j+1} = β_j' − Σ_{l<j} β_l β_{j−1−l},
/// β_0 = q/2, evaluated in power-series arithmetic. jet = q(0), q'(0), …
BetaCoefficients beta_recursion(std::span<const double> jet, int N);

/// The recursion β_{j+1} = ½β_j' + ½Σ_{l≤j} β_l β_{j−l} exactly as printed in
/// the source display. Kept for comparison; it does not reproduce M for
/// constant potentials beyond β_0.
BetaCoefficients beta_recursion_as_printed(std::span<const double> jet, int N);

double expansion_sigma(const BetaCoefficients& beta, double f0, double f0p, int d, double kappa, int N);

struct BoundaryEstimate {
    double f0 = 0.0, f0p = 0.0, q0 = 0.0;
    double se_f0 = 0.0, se_f0p = 0.0, se_q0 = 0.0;  ///< standard errors
    double rms_residual = 0.0;
    double condition = 0.0;
    int used = 0;
};

/// Joint least-squares fit σ ≈ a κ + b + c κ^{-1} + Σ_{i=2}^{terms−2} e_i κ^{-i},
/// giving f0 = a^{-1/2}, f0p = b f0³/(d−2), q0 = 2 c f0².
BoundaryEstimate boundary_data_from_spectrum(std::span<const double> sigma, std::span<const double> kappa, int d,
                                             int terms = 5);
/// Uses the distinct entries with κ ≥ kappa_min (at least 50 required).
BoundaryEstimate boundary_data_from_spectrum(const SteklovSpectrum& s, double kappa_min = 10.0, int terms = 5);

struct ResidualSlope {
    int N = 0;
    double slope = 0.0;
    double intercept = 0.0;
};

/// Log–log slope of |σ_l − expansion(N)| against κ_l over the distinct entries
/// with index in [l_lo, l_hi].
ResidualSlope expansion_residual_slope(const SteklovSpectrum& s, const BetaCoefficients& beta, int N, std::size_t l_lo,
                                       std::size_t l_hi);

}  // namespace steklov
