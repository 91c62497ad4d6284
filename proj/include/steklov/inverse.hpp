#pragma once

// Inverse pipelines: Laplace moments of the transformed potential gap,
// Müntz reconstruction with certified bounds, warping-gap recovery from a
// potential gap, the local-uniqueness decay probe, least-squares
// reconstruction of warping coefficients, and the stability sweep.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steklov/marchenko.hpp"
#include "steklov/muntz.hpp"
#include "steklov/spectrum.hpp"

namespace steklov {

enum class MomentMode { oracle, estimated };

/// m_k = ∫₀¹ t^{λ_k} h(t) dt, h(t) = t^{−(δ+1)/2} B[q̃−q](−log t),
/// λ_k = 2κ_k − 1 + (δ+1)/2 (= 2k + d − 3 + (δ+1)/2 on the round sphere).
struct MomentData {
    MuntzSequence lambda;
    std::vector<double> kappa;
    std::vector<double> moments;
    double spectral_eps = 0.0;  ///< sup |σ_k − σ̃_k| over the entries used
    double eps = 0.0;           ///< moment noise bound
    double delta = 0.5;
    int dimension = 3;
    MomentMode mode = MomentMode::oracle;
    /// Oracle mode only: B[q̃−q] on the kernel grid, and ‖h‖_{L²(0,1)} by quadrature in t.
    std::optional<WeightedFunction> transformed_gap;
    double h_l2 = 0.0;
};

/// Kernels, K₁ and B[q̃−q] of a known pair on a common grid.
struct PairKernels {
    CompositeKernel K1;
    WeightedFunction gap;             ///< q̃ − q
    WeightedFunction transformed_gap; ///< B[q̃ − q]
    double kernel_decay = 0.0;        ///< fitted exponential decay rate of |K|
};
PairKernels pair_kernels(const Warping& w, const Warping& wt, double delta = 0.5, KernelOptions opt = {});

/// Oracle moments from the two warpings (first `count` distinct frequencies of ts).
MomentData oracle_moments(const Warping& w, const Warping& wt, const TransversalSpectrum& ts, std::size_t count,
                          double delta = 0.5, KernelOptions opt = {});

/// Estimated moments m_k ≈ M_k − M̃_k recovered from the two spectra (S∞ products set to 1).
/// Throws DomainError when f(0) or f'(0) differ by more than `boundary_tol`.
MomentData moments_from_spectra(const SteklovSpectrum& s, const SteklovSpectrum& st, std::size_t count,
                                double delta = 0.5, double boundary_tol = 1e-10);

/// Constants entering the certified chain, each with where it came from.
struct FittedConstant {
    double value = 0.0;
    std::string provenance;
};

struct GapOptions {
    int p = 3;                    ///< flatness order; Jackson order r = p − 1
    double h_derivative_sup = 0;  ///< fitted sup |h^{(p−1)}| on [0,1]
    int cap = 40;                 ///< truncation selector cap
};

struct GapEstimate {
    int n = 0;                     ///< n(ε)
    std::size_t k0 = 0;            ///< first index of the Jackson sequence
    Projection projection;
    std::shared_ptr<const MuntzBasis> basis;
    WeightedFunction q_gap;        ///< B^{-1} applied to the reconstructed B[q̃ − q]
    double estimate = 0.0;         ///< ‖q_gap‖_δ
    double h_projection_norm = 0.0;///< ‖π_n h‖ from the moments
    double noise_term = 0.0;       ///< ε Σ_k (Σ_j |C_kj|)² under the square root
    double jackson_term = 0.0;     ///< bound on ‖h − π_n h‖
    double norm_B_inverse = 0.0;
    double certified = 0.0;        ///< ‖B^{-1}‖ sqrt((‖π_n h‖ + noise)² + jackson²)
    double log_rate = 0.0;         ///< (1/log(1/ε))^{p−1}
    std::map<std::string, FittedConstant> constants;
};

/// Selects n(ε), projects h onto span{t^{λ_0..λ_n}}, maps back through B^{-1}
/// with the supplied K₁ and assembles the certified bound.
GapEstimate potential_gap_estimate(const MomentData& md, const CompositeKernel& K1, const GapOptions& opt);

/// ‖f‖_{H_δ} by adaptive quadrature on [0, ∞).
double weighted_norm(const std::function<double(double)>& f, double delta = 0.5);

struct WarpingGap {
    std::vector<double> x, r;
    std::vector<double> rho;      ///< F̃/F on the grid
    std::vector<double> profile;  ///< |c̃(r) − c(r)|
    double sup = 0.0;
    double weighted_sup = 0.0;    ///< sup profile / r^{δ/2}
    int sweeps = 0;
};

struct WarpingGapOptions {
    double delta = 0.5;
    double X = 40.0;    ///< right end of the x grid
    double h = 0.01;
    double tol = 1e-14;
    int max_sweeps = 100;
};

/// Recovers ρ = F̃/F (F = f^{d−2}) from q̃ − q by the tail Volterra equation
/// ρ(x) = 1 + ∫_x^∞ F^{-2}(y) ∫_y^∞ F² ρ (q̃−q) ds dy, then c̃ = c ρ^{1/(d−2)}.
WarpingGap warping_gap_from_potentials(const Warping& w, const std::function<double(double)>& gap,
                                       const WarpingGapOptions& opt = {});
/// Same from samples on a uniform grid starting at 0 (zero beyond the last sample).
WarpingGap warping_gap_from_potentials(const Warping& w, const WeightedFunction& gap,
                                       const WarpingGapOptions& opt = {});

/// W(x) = ∫_x^∞ F^{-2}(y) (∫_y^∞ F⁴ e^{−δs} ds)^{1/2} dy, so that |ρ − 1| ≤ sup ρ · W ‖q̃−q‖_δ.
struct WarpingChain {
    double factor = 0.0;  ///< sup_x c(e^{−x}) W(x) / (d−2)
    double W0 = 0.0;      ///< W(0)
    std::vector<double> x, W;
};
WarpingChain warping_chain(const Warping& w, double delta = 0.5, double X = 40.0, double h = 0.01);
/// sup_r |c̃ − c| ≤ factor G/(1 − W(0)G) for d = 3 (an extra 1/inf ρ for d > 3), G = ‖q̃−q‖_δ;
/// +∞ when W(0)G is too large for the chain to close.
double warping_chain_bound(const WarpingChain& chain, double potential_gap);

struct ProbeResult {
    std::vector<double> kappa;       ///< κ_{k^{d−1}}
    std::vector<double> difference;  ///< |σ − σ̃| at the thinned indices
    std::vector<double> floor;       ///< noise floor per entry
    std::size_t used = 0;            ///< leading entries above the floor
    double slope = 0.0;              ///< fitted coefficient of κ in log|Δσ|
    double threshold = 0.0;          ///< −2a(1 − fit tolerance)
    bool at_floor = false;           ///< too few entries above the floor to fit
    bool agrees = false;             ///< verdict "agrees on [e^{−a}, 1]"
    std::string verdict;
};
/// Thinned differences σ_{k^{d−1}} − σ̃_{k^{d−1}}, k = 1..count, fitted by
/// log|Δ| = α + βκ + γ log κ. Round sphere only.
ProbeResult local_uniqueness_probe(const Warping& w, const Warping& wt, double a, std::size_t count,
                                   double fit_tolerance = 0.1, const WeylOptions& wopt = WeylOptions{1e-12});

struct ReconstructOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-10;
    double step_tol = 1e-13;    ///< relative step size at which the iteration stalls
    double fd_step = 1e-5;
    WeylOptions weyl = WeylOptions{1e-11};
};

struct Reconstruction {
    Warping warping;
    std::vector<double> misfit;   ///< ½ Σ w_k r_k² per accepted iterate
    std::vector<double> gradient; ///< sqrt(gᵀ(JᵀJ)^{-1}g) per accepted iterate
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

/// Weighted least squares over a_p..a_degree (degree ≤ 8), w_k = 1/(1+κ_k)²,
/// Levenberg–Marquardt damping, central-difference Jacobians. The target is
/// matched entry by entry on its distinct frequencies. `init` supplies p, m, A
/// and the starting coefficients.
Reconstruction reconstruct_warping(const SteklovSpectrum& target, const TransversalSpectrum& ts, int degree,
                                   const Warping& init, const ReconstructOptions& opt = {});

/// c̃_s = c + s · profile.
struct StabilityConfig {
    Warping base = Warping::unit(3);
    std::map<int, double> profile;      ///< polynomial profile coefficients
    std::vector<double> calibration_s;  ///< members used only to fit constants
    std::vector<double> test_s;
    std::size_t count = 40;             ///< distinct frequencies used
    double delta = 0.5;
    std::optional<TransversalSpectrum> transversal;  ///< custom sphere → singular mode
    double alpha = 1.0;                 ///< singular mode exponent shift
    KernelOptions kernel;
    WeylOptions weyl = WeylOptions{1e-12};
};

struct StabilityRow {
    double s = 0.0;
    bool calibration = false;
    double eps = 0.0;
    double potential_true = 0.0;
    double potential_estimate = 0.0;
    double potential_certified = 0.0;
    double warping_true = 0.0;
    double warping_bound = 0.0;        ///< C (1/log(1/ε))^{exponent}
    double warping_chain_bound = 0.0;  ///< chain factor applied to potential_certified
    int n = 0;
    double h_derivative_sup = 0.0;     ///< measured on this member
    bool skipped = false;
};

struct StabilityReport {
    int p = 3;
    int dimension = 3;
    double exponent = 2.0;   ///< p − 1, or (p − 1)θ in singular mode
    double theta = 1.0;
    bool singular = false;
    std::vector<StabilityRow> rows;
    std::map<std::string, FittedConstant> constants;
    double fitted_loglog_slope = 0.0;  ///< of log‖c̃−c‖ against log log(1/ε) on test rows
    double eps_decades = 0.0;          ///< log10 span of ε over test rows
    bool sound = true;                 ///< both bounds ≥ true gaps on every test row
    bool eps_monotone = true;
};
StabilityReport stability_experiment(const StabilityConfig& cfg);

}  // namespace steklov
