#pragma once

// Quadrature on uniform grids. All rules are built from local cubic
// interpolation on each panel (one-sided stencils at the ends), so line
// integrals, running integrals and exponentially weighted integrals share the
// same fourth-order accuracy.

#include <functional>
#include <span>
#include <vector>

namespace steklov::quad {

/// Running integral I_j = ∫_{x_0}^{x_j} f for samples f_0..f_n with spacing h.
std::vector<double> cumulative(std::span<const double> f, double h);

/// ∫_{x_0}^{x_n} f.
double integral(std::span<const double> f, double h);

/// Weights w with Σ w_j f_j = integral(f, h) for n+1 points.
std::vector<double> weights(std::size_t points, double h);

/// ∫_{x_0}^{x_n} f(x) e^{-s (x - x_0)} dx with f cubic-interpolated and the
/// exponential integrated exactly on every panel (Filon-type rule).
double laplace(std::span<const double> f, double h, double s);

/// Weights w with Σ w_j f_j = laplace(f, h, s).
std::vector<double> laplace_weights(std::size_t points, double h, double s);

/// Cubic Lagrange interpolation of uniform samples (x_j = x0 + j h) at x,
/// using the four nearest nodes (shifted one-sided near the ends). Points
/// outside the grid are extrapolated from the end stencil.
double interpolate(std::span<const double> f, double x0, double h, double x);

/// Adaptive Gauss–Kronrod on a finite interval.
double adaptive(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

/// Adaptive Gauss–Kronrod on [a, ∞).
double adaptive_tail(const std::function<double(double)>& f, double a, double tol = 1e-13);

/// Composite Gauss–Legendre rule on [a, b] with `panels` equal panels of 20 nodes.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Rule gauss_legendre(double a, double b, int panels);

/// Composite Gauss–Legendre on [0, 1] with panels graded geometrically towards 0,
/// suited to integrands with power behaviour t^λ near the origin.
Rule graded_unit_interval(int panels, double ratio = 0.5);

}  // namespace steklov::quad
