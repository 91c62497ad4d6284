#include "steklov/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "steklov/error.hpp"
#include "steklov/parallel.hpp"
#include "steklov/quadrature.hpp"

namespace steklov {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Tail integrals T_j = ∫_{x_j}^{x_n} f, accumulated from the right so that tiny
// tails keep their relative accuracy.
std::vector<double> tail_integral(const std::vector<double>& f, double h) {
    std::vector<double> rev(f.rbegin(), f.rend());
    auto c = quad::cumulative(rev, h);
    std::reverse(c.begin(), c.end());
    return c;
}

double fitted_decay(const MarchenkoKernel& K) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i <= K.N(); ++i) {
        const double u = K.h() * static_cast<double>(i);
        if (u < 1.0 || u > K.U() - 1.0) continue;
        double sup = 0.0;
        for (std::size_t j = 0; j <= i; ++j) sup = std::max(sup, std::abs(K.H(i, j)));
        if (sup < 1e-13) continue;
        sx += u, sy += std::log(sup), sxx += u * u, sxy += u * std::log(sup), ++n;
    }
    if (n < 5) return 0.0;
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> distinct_kappas(const TransversalSpectrum& ts, std::size_t count) {
    std::vector<double> k(count);
    for (std::size_t j = 0; j < count; ++j) k[j] = kappa_of(ts.distinct(j).mu, ts.dimension());
    return k;
}

std::int64_t expanded_size(const TransversalSpectrum& ts, std::size_t distinct) {
    std::int64_t n = 0;
    for (std::size_t j = 0; j < distinct; ++j) n += ts.distinct(j).multiplicity;
    return n;
}

MuntzSequence moment_exponents(const std::vector<double>& kappa, double delta) {
    std::vector<double> lam(kappa.size());
    for (std::size_t k = 0; k < kappa.size(); ++k) lam[k] = 2.0 * kappa[k] - 1.0 + 0.5 * (delta + 1.0);
    return MuntzSequence(lam);
}

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError(fmt::format("delta must lie in (0,1), got {}", delta));
}

// ‖h‖_{L²(0,1)} with h(t) = t^{−(δ+1)/2} g(−log t), g given on a uniform x grid.
double h_norm_in_t(const WeightedFunction& g) {
    const double X = g.h * static_cast<double>(g.values.size() - 1);
    const auto rule = quad::graded_unit_interval(60, 0.5);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        const double x = -std::log(t);
        if (x > X) continue;
        const double v = std::pow(t, -0.5 * (g.delta + 1.0)) * quad::interpolate(g.values, 0.0, g.h, x);
        acc += rule.weights[i] * v * v;
    }
    return std::sqrt(acc);
}

// sup_t |h^{(r)}(t)| for h(t) = e^{(δ+1)x/2} g(x), t = e^{−x}, using d/dt = −e^{x} d/dx
// and fourth-order differences, over x ∈ [0, x_cut].
double h_derivative_sup(const WeightedFunction& g, int r, double x_cut = 8.0) {
    const std::size_t n = std::min<std::size_t>(g.values.size() - 1, static_cast<std::size_t>(x_cut / g.h));
    std::vector<double> cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
        cur[j] = std::exp(0.5 * (g.delta + 1.0) * g.h * static_cast<double>(j)) * g.values[j];
    for (int k = 0; k < r; ++k) {
        std::vector<double> next(cur.size());
        const std::size_t m = cur.size() - 1;
        for (std::size_t j = 0; j <= m; ++j) {
            double d;
            if (j >= 2 && j + 2 <= m)
                d = (cur[j - 2] - 8 * cur[j - 1] + 8 * cur[j + 1] - cur[j + 2]) / (12 * g.h);
            else if (j < 2)
                d = (-25 * cur[j] + 48 * cur[j + 1] - 36 * cur[j + 2] + 16 * cur[j + 3] - 3 * cur[j + 4]) / (12 * g.h);
            else
                d = (25 * cur[j] - 48 * cur[j - 1] + 36 * cur[j - 2] - 16 * cur[j - 3] + 3 * cur[j - 4]) / (12 * g.h);
            next[j] = -std::exp(g.h * static_cast<double>(j)) * d;
        }
        cur = std::move(next);
    }
    double sup = 0.0;
    for (double v : cur) sup = std::max(sup, std::abs(v));
    return sup;
}

double sup_warping_difference(const Warping& a, const Warping& b) {
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double r = i / 4000.0;
        sup = std::max(sup, std::abs(a.eval(r, 0)[0] - b.eval(r, 0)[0]));
    }
    return sup;
}

}  // namespace

PairKernels pair_kernels(const Warping& w, const Warping& wt, double delta, KernelOptions opt) {
    check_delta(delta);
    const HalfLinePotential q(w), qt(wt);
    const HalfLineOperator op(q), opt_(qt);
    if (opt.U == 0.0) opt.U = std::max({1.0, op.truncation(0.0), opt_.truncation(0.0)});
    if (opt.N == 0) opt.N = std::max<std::size_t>(800, static_cast<std::size_t>(std::ceil(opt.U / 0.0125)));
    const auto K = solve_kernel(op, opt);
    const auto Kt = solve_kernel(opt_, opt);
    PairKernels pk;
    pk.K1 = build_K1(K, Kt);
    const std::size_t n = pk.K1.N();
    pk.gap = WeightedFunction{pk.K1.h(), delta, std::vector<double>(n + 1)};
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = pk.K1.h() * static_cast<double>(j);
        pk.gap.values[j] = qt(x) - q(x);
    }
    pk.transformed_gap = apply_B(pk.K1, pk.gap);
    pk.kernel_decay = std::max(fitted_decay(K), fitted_decay(Kt));
    return pk;
}

namespace {

MomentData moments_from_transformed(const WeightedFunction& Bg, const std::vector<double>& kappa, int d) {
    MomentData md;
    md.mode = MomentMode::oracle;
    md.dimension = d;
    md.delta = Bg.delta;
    md.kappa = kappa;
    md.lambda = moment_exponents(kappa, Bg.delta);
    md.moments.resize(kappa.size());
    // ∫₀¹ t^{λ} h(t) dt = ∫₀^∞ e^{−2κx} B[q̃−q](x) dx under t = e^{−x}.
    for (std::size_t k = 0; k < kappa.size(); ++k) md.moments[k] = quad::laplace(Bg.values, Bg.h, 2.0 * kappa[k]);
    double mmax = 0.0;
    for (double m : md.moments) mmax = std::max(mmax, std::abs(m));
    md.eps = 1e-6 * mmax;
    md.transformed_gap = Bg;
    md.h_l2 = h_norm_in_t(Bg);
    return md;
}

}  // namespace

MomentData oracle_moments(const Warping& w, const Warping& wt, const TransversalSpectrum& ts, std::size_t count,
                          double delta, KernelOptions opt) {
    if (count == 0) throw DomainError("need at least one moment");
    if (w.dimension() != wt.dimension() || w.dimension() != ts.dimension())
        throw DomainError("warpings and transversal spectrum must share the dimension");
    const auto pk = pair_kernels(w, wt, delta, opt);
    return moments_from_transformed(pk.transformed_gap, distinct_kappas(ts, count), w.dimension());
}

MomentData moments_from_spectra(const SteklovSpectrum& s, const SteklovSpectrum& st, std::size_t count,
                                double delta, double boundary_tol) {
    check_delta(delta);
    if (s.dimension != st.dimension) throw DomainError("spectra have different dimensions");
    if (count == 0 || s.entries.size() < count || st.entries.size() < count)
        throw DomainError(fmt::format("need {} distinct entries in both spectra", count));
    if (std::abs(s.f0 - st.f0) > boundary_tol * std::abs(s.f0) || std::abs(s.f0p - st.f0p) > boundary_tol)
        throw DomainError(fmt::format("boundary data differ: f(0) = {} vs {}, f'(0) = {} vs {}", s.f0, st.f0,
                                      s.f0p, st.f0p));
    MomentData md;
    md.mode = MomentMode::estimated;
    md.dimension = s.dimension;
    md.delta = delta;
    md.kappa.resize(count);
    md.moments.resize(count);
    const double f2 = s.f0 * s.f0;
    for (std::size_t k = 0; k < count; ++k) {
        const auto& a = s.entries[k];
        const auto& b = st.entries[k];
        if (std::abs(a.kappa - b.kappa) > 1e-12 * (1.0 + a.kappa))
            throw DomainError(fmt::format("mismatched frequency ladders at entry {}", k));
        md.kappa[k] = a.kappa;
        md.moments[k] = -f2 * (a.sigma - b.sigma);
        md.spectral_eps = std::max(md.spectral_eps, std::abs(a.sigma - b.sigma));
    }
    md.lambda = moment_exponents(md.kappa, delta);
    md.eps = 2.0 * f2 * md.spectral_eps;
    return md;
}

double weighted_norm(const std::function<double(double)>& f, double delta) {
    auto sq = [&](double x) {
        const double v = f(x);
        return v == 0.0 || !std::isfinite(x) ? 0.0 : v * v * std::exp(delta * x);
    };
    return std::sqrt(quad::adaptive(sq, 0.0, 20.0, 1e-15) + quad::adaptive_tail(sq, 20.0, 1e-16));
}

GapEstimate potential_gap_estimate(const MomentData& md, const CompositeKernel& K1, const GapOptions& opt) {
    if (opt.p < 2) throw DomainError("flatness order p must be >= 2");
    if (!(opt.h_derivative_sup >= 0.0)) throw DomainError("derivative bound must be nonnegative");
    if (md.moments.empty()) throw DomainError("no moments");
    const int r = opt.p - 1;
    const double b = md.lambda[0];
    GapEstimate ge;

    double eps = md.spectral_eps > 0.0 ? md.spectral_eps : md.eps;
    if (!(eps > 0.0)) {
        eps = std::numeric_limits<double>::epsilon();
        spdlog::info("zero noise level, selector run at machine epsilon");
    }
    eps = std::min(eps, 0.5);
    const auto choice = truncation_selector(eps, b, opt.cap);
    ge.n = std::min<int>(choice.n, static_cast<int>(md.moments.size()) - 1);
    ge.log_rate = std::pow(1.0 / std::log(1.0 / eps), r);

    std::vector<double> lam(md.lambda.exponents().begin(), md.lambda.exponents().begin() + ge.n + 1);
    ge.basis = std::make_shared<const MuntzBasis>(gram_coefficients(MuntzSequence(lam)));
    ge.projection = project_from_moments(*ge.basis, std::span<const double>(md.moments.data(), lam.size()));
    ge.h_projection_norm = std::sqrt(ge.projection.norm_squared);

    double noise2 = 0.0;
    for (std::size_t k = 0; k < ge.basis->size(); ++k) {
        double row = 0.0;
        for (std::size_t j = 0; j <= k; ++j) row += std::exp(ge.basis->log_magnitude(k, j));
        noise2 += row * row;
    }
    ge.noise_term = md.eps * std::sqrt(noise2);

    // Jackson sequence: smallest k₀ with λ_{k₀} > p − 2.
    ge.k0 = 0;
    while (ge.k0 < lam.size() && !(lam[ge.k0] > r - 1)) ++ge.k0;
    double factorial = 1.0;
    for (int k = 2; k <= r; ++k) factorial *= k;
    if (ge.k0 < lam.size()) {
        const MuntzSequence star(std::vector<double>(lam.begin() + static_cast<long>(ge.k0), lam.end()));
        ge.jackson_term = jackson_bound(star, r, opt.h_derivative_sup).bound;
    }
    // h vanishes to order r at 0, so ‖h‖_∞ ≤ sup|h^{(r)}|/r! is always available.
    ge.jackson_term = ge.k0 < lam.size() ? std::min(ge.jackson_term, opt.h_derivative_sup / factorial)
                                         : opt.h_derivative_sup / factorial;

    // B[q̃−q](x) = e^{−(δ+1)x/2} π_n h(e^{−x}) on the grid of K₁, then B^{-1}.
    const std::size_t N = K1.N();
    WeightedFunction Bg{K1.h(), md.delta, std::vector<double>(N + 1)};
    for (std::size_t j = 0; j <= N; ++j) {
        const double x = K1.h() * static_cast<double>(j);
        Bg.values[j] = std::exp(-0.5 * (md.delta + 1.0) * x) * ge.projection(std::exp(-x));
    }
    const auto inv = invert_B(K1, Bg);
    ge.q_gap = inv.h;
    ge.estimate = inv.h.norm();
    ge.norm_B_inverse = operator_norms(K1, md.delta).norm_B_inverse;

    const double pi_term = ge.h_projection_norm + ge.noise_term;
    ge.certified = ge.norm_B_inverse * std::hypot(pi_term, ge.jackson_term);

    ge.constants["norm_B_inverse"] = {ge.norm_B_inverse, "power iteration on the discretised B^{-1} in H_delta"};
    ge.constants["jackson_40_r"] = {std::pow(40.0, r), fmt::format("Jackson constant 40^r with r = p - 1 = {}", r)};
    ge.constants["h_derivative_sup"] = {opt.h_derivative_sup, "supplied sup |h^(p-1)| (fitted on calibration members)"};
    ge.constants["moment_noise"] = {md.eps, md.mode == MomentMode::oracle ? "oracle moments: 1e-6 relative quadrature allowance"
                                                                           : "estimated moments: 2 f(0)^2 eps"};
    ge.constants["selector_n"] = {static_cast<double>(ge.n), fmt::format("n(eps) with eps = {:.3g}, b = {:.3g}", eps, b)};
    return ge;
}

WarpingGap warping_gap_from_potentials(const Warping& w, const std::function<double(double)>& gap,
                                       const WarpingGapOptions& opt) {
    if (!(opt.h > 0.0) || !(opt.X > 10 * opt.h)) throw DomainError("warping gap grid needs h > 0 and X > 10 h");
    const int d = w.dimension();
    const ConformalFactor f(w);
    const auto n = static_cast<std::size_t>(std::ceil(opt.X / opt.h));
    const double h = opt.X / static_cast<double>(n);
    WarpingGap out;
    out.x.resize(n + 1);
    out.r.resize(n + 1);
    std::vector<double> F2(n + 1), dq(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = h * static_cast<double>(j);
        out.x[j] = x;
        out.r[j] = std::exp(-x);
        F2[j] = std::pow(f.value(x), 2.0 * (d - 2));
        dq[j] = gap(x);
        if (!std::isfinite(dq[j])) throw DomainError(fmt::format("potential gap is not finite at x = {}", x));
    }

    out.rho.assign(n + 1, 1.0);
    std::vector<double> a(n + 1), b(n + 1);
    for (out.sweeps = 1; out.sweeps <= opt.max_sweeps; ++out.sweeps) {
        for (std::size_t j = 0; j <= n; ++j) a[j] = F2[j] * out.rho[j] * dq[j];
        const auto inner = tail_integral(a, h);
        for (std::size_t j = 0; j <= n; ++j) b[j] = inner[j] / F2[j];
        if (out.sweeps == 1) {
            // ∫_x^∞ F^{-2} ∫_y^∞ F² (q̃−q) must converge; its integrand must be negligible near X
            const std::size_t j = n - n / 10;
            if (std::abs(b[j]) * opt.X > 1e-10 * (1.0 + std::abs(b[0])))
                throw DomainError("potential gap does not decay fast enough for the tail integration");
        }
        const auto outer = tail_integral(b, h);
        double change = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double next = 1.0 + outer[j];
            change = std::max(change, std::abs(next - out.rho[j]));
            out.rho[j] = next;
        }
        if (change < opt.tol) break;
        if (!std::isfinite(change)) throw NumericalError("warping gap iteration diverged");
    }
    if (out.sweeps > opt.max_sweeps) throw NumericalError("warping gap iteration did not converge");

    out.profile.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        if (!(out.rho[j] > 0.0)) throw NumericalError("recovered F̃/F is not positive");
        const double c = w.eval(out.r[j], 0)[0];
        out.profile[j] = std::abs(c * (std::pow(out.rho[j], 1.0 / (d - 2)) - 1.0));
        out.sup = std::max(out.sup, out.profile[j]);
        out.weighted_sup = std::max(out.weighted_sup, out.profile[j] / std::pow(out.r[j], 0.5 * opt.delta));
    }
    return out;
}

WarpingGap warping_gap_from_potentials(const Warping& w, const WeightedFunction& gap, const WarpingGapOptions& opt) {
    if (gap.values.size() < 4) throw DomainError("need at least 4 samples of the potential gap");
    const double X = gap.h * static_cast<double>(gap.values.size() - 1);
    auto f = [&](double x) { return x > X ? 0.0 : quad::interpolate(gap.values, 0.0, gap.h, x); };
    return warping_gap_from_potentials(w, std::function<double(double)>(f), opt);
}

WarpingChain warping_chain(const Warping& w, double delta, double X, double h) {
    check_delta(delta);
    const int d = w.dimension();
    const ConformalFactor f(w);
    const auto n = static_cast<std::size_t>(std::ceil(X / h));
    h = X / static_cast<double>(n);
    WarpingChain ch;
    ch.x.resize(n + 1);
    std::vector<double> F4(n + 1), F2(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = h * static_cast<double>(j);
        ch.x[j] = x;
        F2[j] = std::pow(f.value(x), 2.0 * (d - 2));
        F4[j] = F2[j] * F2[j] * std::exp(-delta * x);
    }
    const auto tail4 = tail_integral(F4, h);
    std::vector<double> g(n + 1);
    for (std::size_t j = 0; j <= n; ++j) g[j] = std::sqrt(std::max(tail4[j], 0.0)) / F2[j];
    // the integrand decays like e^{−δx/2}; add its tail beyond X analytically
    const double beyond = g[n] * 2.0 / delta;
    ch.W = tail_integral(g, h);
    for (auto& v : ch.W) v += beyond;
    ch.W0 = ch.W[0];
    for (std::size_t j = 0; j <= n; ++j)
        ch.factor = std::max(ch.factor, w.eval(std::exp(-ch.x[j]), 0)[0] * ch.W[j] / (d - 2));
    // ρ^{1/(d−2)} − 1 is convex-bounded by (ρ − 1)/(d − 2) only for ρ ≥ 1; the
    // lower side is handled in warping_chain_bound.
    return ch;
}

double warping_chain_bound(const WarpingChain& chain, double G) {
    const double t = chain.W0 * G;
    if (!(t < 0.5)) return inf;
    const double rho_max = 1.0 / (1.0 - t);
    const double rho_min = 1.0 - t * rho_max;
    // |ρ^{1/(d−2)} − 1| ≤ |ρ − 1|/(d−2) · max(1, ρ_min^{1/(d−2)−1}) ≤ |ρ − 1|/(d−2) / ρ_min.
    return chain.factor * G * rho_max / rho_min;
}

ProbeResult local_uniqueness_probe(const Warping& w, const Warping& wt, double a, std::size_t count,
                                   double fit_tolerance, const WeylOptions& wopt) {
    if (!(a > 0.0)) throw DomainError("probe radius a must be positive");
    if (count < 4) throw DomainError("probe needs count >= 4");
    if (w.dimension() != wt.dimension()) throw DomainError("warpings have different dimensions");
    const int d = w.dimension();
    const auto ts = TransversalSpectrum::round(d);
    const auto top = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(count), d - 1)));
    const auto s = forward_spectrum(w, ts, top + 1, wopt);
    const auto st = forward_spectrum(wt, ts, top + 1, wopt);
    const auto sig = s.expanded(top + 1), sigt = st.expanded(top + 1), kap = s.expanded_kappa(top + 1);

    ProbeResult pr;
    pr.threshold = -2.0 * a * (1.0 - fit_tolerance);
    for (std::size_t k = 1; k <= count; ++k) {
        const auto idx = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(k), d - 1)));
        pr.kappa.push_back(kap[idx]);
        pr.difference.push_back(std::abs(sig[idx] - sigt[idx]));
        pr.floor.push_back(200.0 * wopt.tol * (1.0 + std::abs(sig[idx])));
    }
    while (pr.used < count && pr.difference[pr.used] > pr.floor[pr.used]) ++pr.used;
    if (pr.used < 4) {
        pr.at_floor = true;
        pr.agrees = true;
        pr.slope = -inf;
        pr.verdict = "rate >= measurable floor";
        return pr;
    }
    Eigen::MatrixXd A(pr.used, 3);
    Eigen::VectorXd y(pr.used);
    for (std::size_t i = 0; i < pr.used; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = pr.kappa[i];
        A(i, 2) = std::log(pr.kappa[i]);
        y(i) = std::log(pr.difference[i]);
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    pr.slope = c(1);
    pr.agrees = pr.slope <= pr.threshold;
    pr.verdict = pr.agrees ? fmt::format("agrees on [e^-{}, 1]", a) : "differs near the boundary";
    return pr;
}

Reconstruction reconstruct_warping(const SteklovSpectrum& target, const TransversalSpectrum& ts, int degree,
                                   const Warping& init, const ReconstructOptions& opt) {
    const int p = init.p();
    if (degree > 8 || degree < p) throw DomainError(fmt::format("degree must lie in [p, 8], got {}", degree));
    if (target.dimension != init.dimension() || ts.dimension() != init.dimension())
        throw DomainError("target, transversal spectrum and initial warping must share the dimension");
    if (target.entries.empty()) throw DomainError("empty target spectrum");
    const std::size_t K = target.entries.size();
    const std::int64_t count = target.size();
    const int P = degree - p + 1;

    std::vector<double> weight(K);
    for (std::size_t k = 0; k < K; ++k) weight[k] = 1.0 / (1.0 + target.entries[k].kappa);  // sqrt of 1/(1+κ)²

    auto make = [&](const Eigen::VectorXd& x) {
        std::map<int, double> c;
        for (int i = 0; i < P; ++i) c[p + i] = x(i);
        return init.with_coefficients(c);
    };
    // scaled residuals; empty on failure of the forward map
    auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        try {
            const auto s = forward_spectrum(make(x), ts, count, opt.weyl);
            if (s.entries.size() != K) return false;
            out.resize(static_cast<Eigen::Index>(K));
            for (std::size_t k = 0; k < K; ++k) {
                if (std::abs(s.entries[k].kappa - target.entries[k].kappa) > 1e-10 * (1.0 + s.entries[k].kappa))
                    throw DomainError("target frequencies do not match the transversal spectrum");
                out(static_cast<Eigen::Index>(k)) = weight[k] * (s.entries[k].sigma - target.entries[k].sigma);
            }
            return out.allFinite();
        } catch (const NumericalError&) {
            return false;
        }
    };

    Eigen::VectorXd x(P);
    const auto c0 = init.coefficients();
    for (int i = 0; i < P; ++i) {
        const auto it = c0.find(p + i);
        x(i) = it == c0.end() ? 0.0 : it->second;
    }
    Eigen::VectorXd r;
    if (!residual(x, r)) throw NumericalError("forward map failed at the initial guess");
    double cost = 0.5 * r.squaredNorm();
    double lambda = -1.0;

    Reconstruction rec{init, {}, {}, 0, false, "iteration limit"};
    for (rec.iterations = 0; rec.iterations < opt.max_iterations; ++rec.iterations) {
        Eigen::MatrixXd J(static_cast<Eigen::Index>(K), P);
        for (int i = 0; i < P; ++i) {
            Eigen::VectorXd xp = x, xm = x, rp, rm;
            xp(i) += opt.fd_step;
            xm(i) -= opt.fd_step;
            if (!residual(xp, rp) || !residual(xm, rm)) throw NumericalError("forward map failed inside the Jacobian stencil");
            J.col(i) = (rp - rm) / (2.0 * opt.fd_step);
        }
        const Eigen::VectorXd g = J.transpose() * r;
        const Eigen::MatrixXd A = J.transpose() * J;
        // gradient norm in the Gauss–Newton metric, sqrt(gᵀ(JᵀJ)^{-1}g); the
        // Euclidean norm is tiny long before poorly resolved directions settle
        const Eigen::VectorXd step = A.completeOrthogonalDecomposition().solve(g);
        const double gnorm = std::sqrt(std::max(g.dot(step), 0.0));
        rec.misfit.push_back(cost);
        rec.gradient.push_back(gnorm);
        if (gnorm < opt.gradient_tol) {
            rec.converged = true;
            rec.stop_reason = "gradient";
            break;
        }
        if (lambda < 0.0) lambda = 1e-3 * A.diagonal().maxCoeff();
        bool accepted = false, stalled = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd Ad = A;
            for (int i = 0; i < P; ++i) Ad(i, i) += lambda * std::max(A(i, i), 1e-12);
            const Eigen::VectorXd dx = Ad.ldlt().solve(-g);
            if (dx.norm() <= opt.step_tol * (x.norm() + opt.step_tol)) {
                stalled = true;
                break;
            }
            Eigen::VectorXd xn = x + dx, rn;
            if (residual(xn, rn) && 0.5 * rn.squaredNorm() < cost) {
                x = xn;
                r = rn;
                cost = 0.5 * rn.squaredNorm();
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            rec.stop_reason = stalled ? "step size" : "no descent";
            rec.converged = stalled || cost < 1e-24;
            break;
        }
    }
    rec.warping = make(x);
    if (!rec.converged) spdlog::warn("reconstruction stopped ({}) with misfit {:.3e}", rec.stop_reason, cost);
    return rec;
}

StabilityReport stability_experiment(const StabilityConfig& cfg) {
    check_delta(cfg.delta);
    if (cfg.profile.empty()) throw DomainError("stability family needs a nonzero profile");
    if (cfg.calibration_s.empty() || cfg.test_s.empty()) throw DomainError("need calibration and test members");
    for (double s : cfg.calibration_s)
        if (std::find(cfg.test_s.begin(), cfg.test_s.end(), s) != cfg.test_s.end())
            throw DomainError("calibration and test members must be disjoint");
    const Warping& base = cfg.base;
    const int d = base.dimension(), p = base.p();
    const auto ts = cfg.transversal ? *cfg.transversal : TransversalSpectrum::round(d);
    if (ts.dimension() != d) throw DomainError("transversal spectrum dimension mismatch");

    StabilityReport rep;
    rep.p = p;
    rep.dimension = d;
    rep.exponent = p - 1;
    if (!ts.is_round()) {
        const auto ss = singular_sequence(ts, cfg.alpha, std::min<std::size_t>(cfg.count, 8));
        rep.singular = true;
        rep.theta = ss.theta;
        rep.exponent = (p - 1) * ss.theta;
        rep.constants["theta"] = {ss.theta, fmt::format("1/B from the singular sequence, N = {}, B = {:.6g}", ss.N, ss.B)};
    }

    const std::int64_t total = expanded_size(ts, cfg.count);
    const auto s0 = forward_spectrum(base, ts, total, cfg.weyl);
    const auto kappas = distinct_kappas(ts, cfg.count);
    const auto chain = warping_chain(base, cfg.delta);
    rep.constants["warping_chain_factor"] = {chain.factor, "sup_x c(e^-x) W(x)/(d-2) by quadrature of the reference factor"};
    rep.constants["warping_chain_W0"] = {chain.W0, "W(0) of the reference factor"};

    std::vector<double> all_s = cfg.calibration_s;
    all_s.insert(all_s.end(), cfg.test_s.begin(), cfg.test_s.end());
    rep.rows.resize(all_s.size());
    std::vector<PairKernels> kernels(all_s.size());
    std::vector<MomentData> moments(all_s.size());

    auto member = [&](double s) {
        auto c = base.coefficients();
        for (const auto& [k, v] : cfg.profile) c[k] += s * v;
        return base.with_coefficients(c);
    };

    parallel_for(all_s.size(), [&](std::size_t i) {
        auto& row = rep.rows[i];
        row.s = all_s[i];
        row.calibration = i < cfg.calibration_s.size();
        const auto wt = member(row.s);
        const auto st = forward_spectrum(wt, ts, total, cfg.weyl);
        row.eps = spectrum_sup_distance(s0, st, total);
        if (row.eps == 0.0) {
            row.skipped = true;
            return;
        }
        const HalfLinePotential q(base), qt(wt);
        row.potential_true = weighted_norm([&](double x) { return qt(x) - q(x); }, cfg.delta);
        row.warping_true = sup_warping_difference(base, wt);
        kernels[i] = pair_kernels(base, wt, cfg.delta, cfg.kernel);
        moments[i] = moments_from_transformed(kernels[i].transformed_gap, kappas, d);
        moments[i].spectral_eps = row.eps;
        row.h_derivative_sup = h_derivative_sup(kernels[i].transformed_gap, p - 1);
    });

    // constants from calibration members only
    double Dh = 0.0, C = 0.0, decay = inf;
    for (const auto& row : rep.rows) {
        if (!row.calibration || row.skipped) continue;
        Dh = std::max(Dh, row.h_derivative_sup);
        C = std::max(C, row.warping_true * std::pow(std::log(1.0 / row.eps), rep.exponent));
    }
    for (std::size_t i = 0; i < cfg.calibration_s.size(); ++i)
        if (!rep.rows[i].skipped) decay = std::min(decay, kernels[i].kernel_decay);
    if (!(C > 0.0)) throw NumericalError("calibration members produced no usable constant");
    rep.constants["C"] = {C, fmt::format("max over {} calibration members of |c~-c|_inf log(1/eps)^{:.4g}",
                                         cfg.calibration_s.size(), rep.exponent)};
    rep.constants["h_derivative_sup"] = {Dh, "max over calibration members of sup|h^(p-1)| by finite differences"};
    rep.constants["kernel_decay"] = {decay, "smallest fitted decay rate of |K| over calibration members"};

    parallel_for(all_s.size(), [&](std::size_t i) {
        auto& row = rep.rows[i];
        if (row.skipped) return;
        GapOptions go;
        go.p = p;
        go.h_derivative_sup = row.calibration ? row.h_derivative_sup : Dh;
        const auto ge = potential_gap_estimate(moments[i], kernels[i].K1, go);
        row.n = ge.n;
        row.potential_estimate = ge.estimate;
        row.potential_certified = ge.certified;
        row.warping_bound = C * std::pow(1.0 / std::log(1.0 / row.eps), rep.exponent);
        row.warping_chain_bound = warping_chain_bound(chain, row.potential_certified);
        if (i == 0) {
            for (const auto& [k, v] : ge.constants)
                if (k != "selector_n" && k != "h_derivative_sup") rep.constants[k] = v;
        }
    });

    // diagnostics over test rows
    std::vector<std::pair<double, double>> test;
    for (const auto& row : rep.rows) {
        if (row.calibration || row.skipped) continue;
        if (row.warping_true > row.warping_bound || row.potential_true > row.potential_certified ||
            row.warping_true > row.warping_chain_bound)
            rep.sound = false;
        test.emplace_back(row.s, row.eps);
    }
    std::sort(test.begin(), test.end());
    for (std::size_t i = 1; i < test.size(); ++i)
        if (!(test[i].second > test[i - 1].second)) rep.eps_monotone = false;
    if (test.size() >= 2) {
        rep.eps_decades = std::log10(test.back().second / test.front().second);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (const auto& row : rep.rows) {
            if (row.calibration || row.skipped || !(row.warping_true > 0)) continue;
            const double lx = std::log(std::log(1.0 / row.eps)), ly = std::log(row.warping_true);
            sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
        }
        if (n >= 2) rep.fitted_loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return rep;
}

}  // namespace steklov
