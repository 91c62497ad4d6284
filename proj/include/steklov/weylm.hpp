#pragma once

// Half-line Schrödinger operator −y'' + q y on [0,∞) with a rapidly decaying
// potential: Weyl–Titchmarsh function, fundamental solutions, characteristic
// functions and Dirichlet eigenvalues.

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "steklov/warp.hpp"

namespace steklov {

struct WeylOptions {
    double tol = 1e-10;        ///< relative tolerance of the integrator
    double x_max = 0.0;        ///< 0 picks the truncation point from the decay of q
    double x_cap = 80.0;       ///< upper limit for the automatic truncation point
    bool first_order_tail = false;  ///< start from m = −κ − q/(2κ) instead of −κ
};

class HalfLineOperator {
public:
    HalfLineOperator(std::function<double(double)> q, WeylOptions opt = {});
    explicit HalfLineOperator(const HalfLinePotential& q, WeylOptions opt = {});

    double q(double x) const { return q_(x); }
    const WeylOptions& options() const noexcept { return opt_; }
    /// Smallest x on a 0.25 grid with |q| < 1e-14 (1+κ²) on [x, x+2].
    double truncation(double kappa) const;
    /// min q over [0, x_cap] sampled at spacing 0.01.
    double inf_q() const;

private:
    std::function<double(double)> q_;
    WeylOptions opt_;
    std::vector<double> samples_;  // |q| on the 0.25 grid, sup over each cell
    double inf_q_;
};

struct WeylData {
    double kappa = 0.0;
    double M = 0.0;             ///< M(−κ²)
    double u0 = 0.0;            ///< M + κ, computed without cancellation
    double S_inf_at_0 = 1.0;    ///< S_∞(0) with S_∞(x) ~ e^{−κx} at infinity
    double residual = 0.0;      ///< tail truncation estimate |q(x_max)|/(2κ)
    double x_max = 0.0;
    long steps = 0;
};

/// Riccati integration of m = −κ + u backward from x_max. Throws BlowUpError
/// if u diverges (a Dirichlet resonance above −κ²).
WeylData weyl_m(const HalfLineOperator& op, double kappa);

/// S_∞(x) = P(x) e^{−κx} and the Riccati deviation u(x) = S'/S + κ on the grid x_j = j h.
struct WeylProfile {
    double kappa = 0.0;
    double h = 0.0;
    std::vector<double> P;
    std::vector<double> u;
};
WeylProfile weyl_profile(const HalfLineOperator& op, double kappa, double h, std::size_t points);

/// (C₀, C₀', S₀, S₀') at x for spectral parameter z.
std::array<double, 4> fundamental_solutions(const HalfLineOperator& op, double z, double x);

/// (Δ(z), d(z)) = (W(S₀, S_∞), W(C₀, S_∞)) for z < 0, S_∞ normalised as above.
std::pair<double, double> characteristic_functions(const HalfLineOperator& op, double z);

/// Negative Dirichlet eigenvalues (zeros of Δ), ascending. The search covers
/// [min(inf q, −(d−2)²/4) − 0.01, 0), i.e. all of the negative spectrum.
std::vector<double> dirichlet_eigenvalues(const HalfLineOperator& op, int d);

}  // namespace steklov
