#pragma once

// Warping functions c(r) on [0,1], the conformal factor f(x) = c(e^{-x}) e^{-x/2}
// and the effective half-line potential q(x).

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "steklov/series.hpp"

namespace steklov {

/// amplitude · r^power_lead · (knot − r)_+^power. Vanishes identically on
/// [knot, 1], which is how pairs that agree near the boundary are built.
struct TruncatedTerm {
    double amplitude = 0.0;
    double knot = 1.0;
    int power = 8;
};

/// c(r) = 1 + Σ_{k≥p} a_k r^k (+ optional truncated terms, each carrying r^p).
class Warping {
public:
    Warping(int dimension, int p, int m, double A, bool smooth, const std::map<int, double>& coefficients,
            std::vector<TruncatedTerm> truncated = {});

    /// c ≡ 1.
    static Warping unit(int dimension, int p = 3, int m = 4, double A = 3.0);

    int dimension() const noexcept { return d_; }
    int p() const noexcept { return p_; }
    int m() const noexcept { return m_; }
    double A() const noexcept { return A_; }
    bool smooth() const noexcept { return smooth_; }
    std::map<int, double> coefficients() const;
    const std::vector<TruncatedTerm>& truncated_terms() const noexcept { return truncated_; }
    int degree() const noexcept { return static_cast<int>(poly_.size()) - 1; }

    /// Same structural data, new polynomial coefficients (keys ≥ p).
    Warping with_coefficients(const std::map<int, double>& coefficients) const;

    /// c(r), c'(r), …, c^{(order)}(r); requires r ∈ [0,1] and order ≤ m.
    std::vector<double> eval(double r, int order) const;

    /// c(r), c'(r), c''(r) without range checks (hot path).
    void value3(double r, double& c, double& c1, double& c2) const;

    /// Taylor series of c around r0 in powers of (r − r0), any order.
    Series taylor(double r0, int order) const;

private:
    int d_, p_, m_;
    double A_;
    bool smooth_;
    std::vector<double> poly_;  // poly_[0] = 1
    std::vector<TruncatedTerm> truncated_;
};

/// f(x) = c(e^{-x}) e^{-x/2}.
class ConformalFactor {
public:
    explicit ConformalFactor(Warping w);
    double value(double x) const;
    double derivative(double x) const;
    /// Taylor series of f around x0.
    Series taylor(double x0, int order) const;
    double f0() const noexcept { return f0_; }
    double f0p() const noexcept { return f0p_; }
    const Warping& warping() const noexcept { return w_; }

private:
    Warping w_;
    double f0_, f0p_;
};

/// q(x) = (d−2)[(d−3) r²(c'/c)² + r² c''/c + (d−1) r c'/c], r = e^{-x}.
class HalfLinePotential {
public:
    explicit HalfLinePotential(Warping w);
    double operator()(double x) const;
    /// q(x), q'(x), …, q^{(order)}(x).
    std::vector<double> derivatives(double x, int order) const;
    /// Taylor series of q around x0 (exact, via power-series arithmetic).
    Series taylor(double x0, int order) const;
    int decay_order() const noexcept { return w_.p(); }
    const Warping& warping() const noexcept { return w_; }
    std::function<double(double)> function() const;

private:
    Warping w_;
};

/// Jet q(0), …, q^{(order)}(0); order ≤ m − 2.
std::vector<double> potential_jet_at_zero(const HalfLinePotential& q, int order);

/// Alternative route: F''/F − (d−2)²/4 with F = f^{d−2}, derivatives of F by
/// power-series arithmetic on f.
double potential_from_conformal_factor(const ConformalFactor& f, double x);

struct AdmissibilityReport {
    bool member = true;
    bool positive = true;
    double norm_c = 0.0;      ///< Σ_{k≤m} sup |c^{(k)}|
    double norm_inv_c = 0.0;  ///< same for 1/c
    double min_c = 0.0;
    double fitted_CA = 0.0;   ///< max_{k≤m−2} sup_x |q^{(k)}(x)| e^{p x} over x ∈ [0, 12]
    std::vector<std::string> violations;
};

/// Checks positivity and ‖c‖_{C^m} + ‖1/c‖_{C^m} ≤ A on 1001 points, and fits
/// the decay constant of q. Never throws.
AdmissibilityReport admissibility_check(const Warping& w);

}  // namespace steklov
