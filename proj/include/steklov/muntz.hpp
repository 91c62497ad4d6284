#pragma once

// Müntz systems {t^{λ_k}} on [0,1]: orthonormal Gram–Schmidt coefficients,
// the Blaschke index of approximation, projections from moments, Jackson-type
// error bounds and the truncation selector of the moment pipeline.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "steklov/quadrature.hpp"
#include "steklov/transversal.hpp"

namespace steklov {

using wide = boost::multiprecision::cpp_bin_float_50;

class MuntzSequence {
public:
    MuntzSequence() = default;
    /// Strictly increasing, nonnegative exponents.
    explicit MuntzSequence(std::vector<double> exponents);
    /// λ_k = 2k + b for k = first..last.
    static MuntzSequence arithmetic(double b, int first, int last);

    std::size_t size() const noexcept { return lambda_.size(); }
    double operator[](std::size_t k) const { return lambda_[k]; }
    const std::vector<double>& exponents() const noexcept { return lambda_; }
    /// λ_{k+1} − λ_k ≥ 2 for all k.
    bool separated() const noexcept;
    double min_gap() const noexcept;
    /// λ_j − s for all j; requires λ_0 ≥ s.
    MuntzSequence shifted(double s) const;

private:
    std::vector<double> lambda_;
};

class MuntzBasis {
public:
    const MuntzSequence& sequence() const noexcept { return seq_; }
    std::size_t size() const noexcept { return seq_.size(); }
    /// C_mj for j ≤ m, in 50-digit arithmetic.
    const wide& coefficient(std::size_t m, std::size_t j) const { return C_[m][j]; }
    double log_magnitude(std::size_t m, std::size_t j) const { return logmag_[m][j]; }
    int sign(std::size_t m, std::size_t j) const { return sign_[m][j]; }
    /// True when some |C_mj| exceeds the double range.
    bool overflow() const noexcept { return overflow_; }
    const quad::Rule& rule() const noexcept { return rule_; }

    /// L_0..L_n at t ∈ [0,1], summed in 50-digit arithmetic.
    std::vector<double> evaluate(double t) const;
    double evaluate(std::size_t m, double t) const;
    /// ∫ L_m L_k by the stored quadrature rule.
    std::vector<std::vector<double>> gram_matrix() const;
    double orthonormality_error() const;

private:
    friend MuntzBasis gram_coefficients(const MuntzSequence&);
    MuntzSequence seq_;
    std::vector<std::vector<wide>> C_;
    std::vector<std::vector<double>> logmag_;
    std::vector<std::vector<int>> sign_;
    bool overflow_ = false;
    quad::Rule rule_;
};

/// C_mj = sqrt(2λ_m+1) Π_{r<m}(λ_j+λ_r+1) / Π_{r≠j, r≤m}(λ_j−λ_r).
MuntzBasis gram_coefficients(const MuntzSequence& lambda);

/// Quadrature on [0,1] used for Gram checks: graded panels near 0, uniform above.
quad::Rule unit_interval_rule();

/// Π_{r<m}(λ_j+λ_r+1)/Π_{r≠j}(λ_j−λ_r) for integer exponents, exactly.
boost::multiprecision::cpp_rational exact_gram_ratio(std::span<const std::int64_t> lambda, std::size_t m, std::size_t j);
/// (−1)^{m−j} (m+j)! / ((m−j)! j!²), i.e. C⁰_mj / sqrt(2m+1) for λ_k = k.
boost::multiprecision::cpp_int legendre_coefficient(std::size_t m, std::size_t j);

struct LegendreBoundReport {
    bool holds = true;
    double worst_ratio = 0.0;  ///< max |C⁰_mj| / (sqrt(2m+1) 3^{m+j})
};
/// |C⁰_mj| ≤ sqrt(2m+1) 3^{m+j} for all j ≤ m ≤ n, checked in exact integers.
LegendreBoundReport legendre_bound_check(int n);

struct BlaschkeIndex {
    double value = 0.0;        ///< ε_∞ = max_{y≥0} |B(1+iy)/(1+iy)|
    double argmax = 0.0;
    bool separated = false;    ///< closed form applicable
    std::optional<double> closed_form;  ///< Π (λ_k−1)/(λ_k+1) over λ_k > 0
};
BlaschkeIndex blaschke_index(const MuntzSequence& lambda);
/// log |B(1+iy)/(1+iy)| (λ = 0 contributes the factor 1).
double blaschke_log_modulus(const MuntzSequence& lambda, double y);

struct Projection {
    std::vector<double> coefficients;   ///< ⟨f, L_k⟩
    std::vector<std::size_t> cancelled; ///< k with |⟨f,L_k⟩| < 1e-12 Σ_j |C_kj m_j|
    double norm_squared = 0.0;          ///< ‖π_n f‖² = Σ ⟨f,L_k⟩²
    std::vector<wide> monomial;         ///< π_n f = Σ_j a_j t^{λ_j}
    const MuntzSequence* sequence = nullptr;
    double operator()(double t) const;
};
/// ⟨f,L_k⟩ = Σ_j C_kj m_j with m_j = ∫₀¹ f t^{λ_j}. The projection keeps a
/// pointer to the basis sequence, so the basis must outlive it.
Projection project_from_moments(const MuntzBasis& basis, std::span<const double> moments);

struct TruncationChoice {
    int n = 0;
    double uncapped = 0.0;  ///< g^{-1}(1/sqrt ε) before flooring and capping
    bool capped = false;
    double M = 0.0;
    double g_n = 0.0;
};
/// g(t) = (3/2)(a²−1)^{-1/2} sqrt(2t+1) a^{t+1}, a = 9M/2, M = max(2, 4b+1).
double selector_g(double t, double b);
/// n(ε) = floor(g^{-1}(ε^{-1/2})), capped at `cap`; 0 when g(0) > ε^{-1/2}.
TruncationChoice truncation_selector(double eps, double b, int cap = 40);

struct JacksonBound {
    double bound = 0.0;
    std::vector<double> indices;  ///< ε_∞(Λ^{(k)}), k = 0..r−1
};
/// 40^r Π_{k<r} ε_∞(Λ^{(k)}) sup|f^{(r)}| for Λ* with λ_1 > r − 1.
JacksonBound jackson_bound(const MuntzSequence& lambda_star, int r, double f_deriv_sup);
/// Same bound for λ_k = 2k + b, k = 1..n, via Π (b−k+1)/(2n+b−k+1); needs b ≥ r − 1.
double jackson_bound_arithmetic(int n, double b, int r, double f_deriv_sup);

struct SingularSequence {
    MuntzSequence lambda;
    int N = 1;
    double c = 0.0;      ///< Weyl constant c_{d−1}
    double C = 0.0;      ///< sup_k |ν_k − c k|
    double B = 0.0;      ///< c N
    double theta = 0.0;  ///< 1 / B
    double alpha = 1.0;
};
/// λ_k = 2 ν_{Nk} + α − 1 (ν_k = κ_{k^{d−1}}), k = 0..length−1, with N the
/// smallest integer making cN > 3C and cN − 2C ≥ 1; the separation is verified.
SingularSequence singular_sequence(const TransversalSpectrum& ts, double alpha, std::size_t length);

}  // namespace steklov
