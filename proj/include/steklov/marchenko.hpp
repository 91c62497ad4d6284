#pragma once

// Transformation (Marchenko) kernels of half-line potentials, the composite
// kernel K₁ of a pair, and the Volterra operator B h = h + ∫_0^x K₁(x,t) h(t) dt
// on the weighted space H_δ (‖h‖² = ∫ |h|² e^{δx} dx).

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "steklov/weylm.hpp"

namespace steklov {

struct KernelOptions {
    double U = 0.0;       ///< half-sum extent; 0 picks it from the decay of q
    std::size_t N = 0;    ///< grid cells in u; 0 means max(800, U/0.0125)
    double tol = 1e-13;   ///< Picard stopping threshold on the sup-change
    int max_sweeps = 200;
};

/// H(u,v) = K(u−v, u+v) on the triangle 0 ≤ v ≤ u ≤ U, uniform spacing h = U/N.
class MarchenkoKernel {
public:
    MarchenkoKernel() = default;
    MarchenkoKernel(double h, std::vector<std::vector<double>> H, int sweeps, double last_change);

    double h() const noexcept { return h_; }
    std::size_t N() const noexcept { return H_.size() - 1; }
    double U() const noexcept { return h_ * static_cast<double>(N()); }
    /// Grid value H(i h, j h), j ≤ i.
    double H(std::size_t i, std::size_t j) const { return H_[i][j]; }
    /// K(x,t) for 0 ≤ x ≤ t by bicubic interpolation in (t−x, t+x); 0 when (x+t)/2 > U.
    double K(double x, double t) const;
    int sweeps() const noexcept { return sweeps_; }
    double last_change() const noexcept { return change_; }

private:
    double h_ = 0.0;
    std::vector<std::vector<double>> H_;
    int sweeps_ = 0;
    double change_ = 0.0;
};

/// Picard iteration of H(u,v) = ½∫_u^∞ q + ∫_u^U ∫_0^v q(s−β) H(s,β) dβ ds.
MarchenkoKernel solve_kernel(const std::function<double(double)>& q, const KernelOptions& opt);
MarchenkoKernel solve_kernel(const HalfLineOperator& op, KernelOptions opt = {});

/// S_∞(x,−κ²) = e^{−κx} + ∫_x^∞ K(x,t) e^{−κt} dt at x = 0.
double kernel_weyl_solution_at_0(const MarchenkoKernel& K, double kappa);

/// K₁(x,t), 0 ≤ t ≤ x ≤ X, on the kernels' grid (x = i h, t = j h).
class CompositeKernel {
public:
    CompositeKernel() = default;
    CompositeKernel(double h, std::vector<std::vector<double>> K1) : h_(h), K1_(std::move(K1)) {}
    double h() const noexcept { return h_; }
    std::size_t N() const noexcept { return K1_.size() - 1; }
    double X() const noexcept { return h_ * static_cast<double>(N()); }
    double operator()(std::size_t i, std::size_t j) const { return K1_[i][j]; }
    static CompositeKernel zero(double h, std::size_t N);

private:
    double h_ = 0.0;
    std::vector<std::vector<double>> K1_;
};

/// K₁(x,t) = 2K(t,2x−t) + 2K̃(t,2x−t) + 2∫_t^{2x−t} K(t,u)K̃(t,2x−u) du.
/// X defaults to min(U, Ũ); the grids must share h.
CompositeKernel build_K1(const MarchenkoKernel& K, const MarchenkoKernel& Kt, double X = 0.0);

/// Samples h(x_j), x_j = j h, of a function in H_δ.
struct WeightedFunction {
    double h = 0.0;
    double delta = 0.5;
    std::vector<double> values;
    double norm() const;
};

WeightedFunction sample_weighted(const std::function<double(double)>& f, double h, std::size_t N, double delta = 0.5);

WeightedFunction apply_B(const CompositeKernel& K1, const WeightedFunction& g);

struct InverseResult {
    WeightedFunction h;
    int terms = 0;
    double residual = 0.0;  ///< ‖B h − g‖_δ
};
/// Truncated Neumann series Σ (−1)^n C^n g, stopped when a term's norm < tol.
InverseResult invert_B(const CompositeKernel& K1, const WeightedFunction& g, double tol = 1e-12);

struct OperatorNorms {
    double norm_B = 0.0;
    double norm_B_inverse = 0.0;
    int iterations = 0;
};
/// ‖B‖ and ‖B^{-1}‖ on the discretised H_δ by power iteration.
OperatorNorms operator_norms(const CompositeKernel& K1, double delta = 0.5);

struct TransferRow {
    double kappa = 0.0;
    double lhs = 0.0;         ///< S_∞(0) S̃_∞(0) (M − M̃)
    double rhs_profile = 0.0; ///< ∫ (q̃ − q) S_∞ S̃_∞
    double rhs_volterra = 0.0;///< ∫ e^{−2κx} B[q̃ − q]
    double mismatch = 0.0;    ///< max relative deviation of the two right sides from lhs
};
struct TransferReport {
    std::vector<TransferRow> rows;
    double worst = 0.0;
    double worst_absolute = 0.0;
};
TransferReport transfer_identity_check(const Warping& w, const Warping& wt, const std::vector<double>& kappas,
                                       KernelOptions opt = {}, const WeylOptions& wopt = WeylOptions{1e-12});

struct AFunctionRow {
    double kappa = 0.0;
    double lhs = 0.0;  ///< |M + κ + ∫ q e^{−2κα}|
    double rhs = 0.0;  ///< ∫ Q² e^{αQ} e^{−2κα}, Q(α) = ∫_0^α |q|
    bool holds = true;
    double slack = 0.0;  ///< rhs / lhs (∞ when lhs = 0)
};
struct AFunctionReport {
    double q_l1 = 0.0;
    std::vector<AFunctionRow> rows;
    bool all_hold = true;
};
/// Requires κ > ½‖q‖_{L¹} for every κ.
AFunctionReport a_function_bound_check(const HalfLineOperator& op, const std::vector<double>& kappas);

/// CSV rows `x,t,K` on the grid points with x ≤ t.
void write_kernel_csv(const MarchenkoKernel& K, const std::string& path, std::size_t stride = 1);

}  // namespace steklov
