#include "steklov/marchenko.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "steklov/error.hpp"
#include "steklov/parallel.hpp"
#include "steklov/quadrature.hpp"

namespace steklov {
namespace {

// weights(len, h) for every len = 0..n+1, so inner loops do not allocate.
std::vector<std::vector<double>> weight_table(std::size_t n, double h) {
    std::vector<std::vector<double>> t(n + 2);
    for (std::size_t len = 1; len <= n + 1; ++len) t[len] = quad::weights(len, h);
    return t;
}

double default_extent(const HalfLineOperator& op) { return std::max(1.0, op.truncation(0.0)); }

std::size_t default_cells(double U) {
    return std::max<std::size_t>(800, static_cast<std::size_t>(std::ceil(U / 0.0125)));
}

// Dense lower-triangular matrix of I + C on the first n+1 nodes.
Eigen::MatrixXd dense_B(const CompositeKernel& K1, std::size_t n) {
    const auto table = weight_table(n, K1.h());
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n + 1, n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        const auto& w = table[i + 1];
        for (std::size_t j = 0; j <= i; ++j) B(i, j) += w[j] * K1(i, j);
    }
    return B;
}

Eigen::VectorXd sqrt_weights(std::size_t n, double h, double delta) {
    const auto w = quad::weights(n + 1, h);
    Eigen::VectorXd D(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
        D(j) = std::sqrt(std::max(w[j], 1e-300) * std::exp(delta * h * static_cast<double>(j)));
    return D;
}

}  // namespace

MarchenkoKernel::MarchenkoKernel(double h, std::vector<std::vector<double>> H, int sweeps, double last_change)
    : h_(h), H_(std::move(H)), sweeps_(sweeps), change_(last_change) {}

double MarchenkoKernel::K(double x, double t) const {
    if (!(x >= 0.0) || !(t >= x)) throw DomainError(fmt::format("K(x,t) needs 0 <= x <= t, got ({}, {})", x, t));
    const double u = 0.5 * (x + t), v = 0.5 * (t - x);
    const long n = static_cast<long>(N());
    if (u > U() * (1.0 + 1e-14)) return 0.0;
    // In (a, j) = ((u−v)/h, v/h) the triangle is a quadrant, so a 4×4 tensor stencil
    // fits next to both edges; nodes beyond u = U count as zero.
    const double ax = x / h_, jv = v / h_;
    const long a0 = std::max<long>(0, static_cast<long>(std::floor(ax)) - 1);
    const long j0 = std::max<long>(0, static_cast<long>(std::floor(jv)) - 1);
    auto lagrange = [](double pos, long start, std::array<double, 4>& w) {
        for (int a = 0; a < 4; ++a) {
            double l = 1.0;
            for (int b = 0; b < 4; ++b)
                if (a != b) l *= (pos - static_cast<double>(start + b)) / static_cast<double>(a - b);
            w[a] = l;
        }
    };
    std::array<double, 4> wa{}, wj{};
    lagrange(ax, a0, wa);
    lagrange(jv, j0, wj);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const long i = a0 + a + j0 + b;
            if (i <= n) acc += wa[a] * wj[b] * H_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j0 + b)];
        }
    return acc;
}

MarchenkoKernel solve_kernel(const std::function<double(double)>& q, const KernelOptions& opt) {
    if (!(opt.U > 0.0)) throw DomainError("kernel extent U must be positive");
    const std::size_t N = opt.N ? opt.N : default_cells(opt.U);
    if (N < 8) throw DomainError("kernel grid needs at least 8 cells");
    const double h = opt.U / static_cast<double>(N);

    std::vector<double> qg(N + 1);
    for (std::size_t k = 0; k <= N; ++k) qg[k] = q(h * static_cast<double>(k));
    const auto Q = quad::cumulative(qg, h);
    const double tail = quad::adaptive_tail(q, opt.U, 1e-15);
    std::vector<double> H0(N + 1);
    for (std::size_t i = 0; i <= N; ++i) H0[i] = 0.5 * (Q[N] - Q[i] + tail);

    std::vector<std::vector<double>> H(N + 1), G(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        H[i].assign(i + 1, H0[i]);
        G[i].assign(i + 1, 0.0);
    }
    int sweep = 0;
    double change = 0.0;
    std::vector<double> f, col;
    for (; sweep < opt.max_sweeps; ++sweep) {
        // G(s,v) = ∫_0^v q(s−β) H(s,β) dβ
        for (std::size_t s = 0; s <= N; ++s) {
            f.resize(s + 1);
            for (std::size_t b = 0; b <= s; ++b) f[b] = qg[s - b] * H[s][b];
            G[s] = quad::cumulative(f, h);
        }
        // H(u,v) = H0(u) + ∫_u^U G(s,v) ds
        change = 0.0;
        double scale = 0.0;
        for (std::size_t v = 0; v <= N; ++v) {
            col.resize(N - v + 1);
            for (std::size_t k = 0; k <= N - v; ++k) col[k] = G[N - k][v];
            const auto R = quad::cumulative(col, h);
            for (std::size_t u = v; u <= N; ++u) {
                const double nv = H0[u] + R[N - u];
                change = std::max(change, std::abs(nv - H[u][v]));
                scale = std::max(scale, std::abs(nv));
                H[u][v] = nv;
            }
        }
        if (change <= opt.tol * std::max(1.0, scale)) {
            ++sweep;
            break;
        }
    }
    if (change > opt.tol * 1e3) throw NumericalError(fmt::format("kernel Picard iteration stalled (change {:.3g})", change));
    spdlog::debug("marchenko kernel: U={} N={} sweeps={} change={:.3g}", opt.U, N, sweep, change);
    return MarchenkoKernel(h, std::move(H), sweep, change);
}

MarchenkoKernel solve_kernel(const HalfLineOperator& op, KernelOptions opt) {
    if (opt.U == 0.0) opt.U = default_extent(op);
    return solve_kernel([&op](double x) { return op.q(x); }, opt);
}

double kernel_weyl_solution_at_0(const MarchenkoKernel& K, double kappa) {
    std::vector<double> diag(K.N() + 1);
    for (std::size_t i = 0; i <= K.N(); ++i) diag[i] = K.H(i, i);
    return 1.0 + quad::laplace(diag, 2.0 * K.h(), kappa);
}

CompositeKernel CompositeKernel::zero(double h, std::size_t N) {
    std::vector<std::vector<double>> z(N + 1);
    for (std::size_t i = 0; i <= N; ++i) z[i].assign(i + 1, 0.0);
    return CompositeKernel(h, std::move(z));
}

CompositeKernel build_K1(const MarchenkoKernel& K, const MarchenkoKernel& Kt, double X) {
    const double h = K.h();
    if (std::abs(h - Kt.h()) > 1e-12 * h) throw DomainError("composite kernel needs kernels on the same grid");
    std::size_t n = std::min(K.N(), Kt.N());
    if (X > 0.0) {
        const auto nx = static_cast<std::size_t>(std::llround(X / h));
        if (nx > n) throw DomainError(fmt::format("X = {} exceeds the kernel extent {}", X, h * static_cast<double>(n)));
        n = nx;
    }
    const auto table = weight_table(n, h);
    std::vector<std::vector<double>> K1(n + 1);
    parallel_for(n + 1, [&](std::size_t i) {
        K1[i].assign(i + 1, 0.0);
        std::vector<double> f;
        for (std::size_t j = 0; j <= i; ++j) {
            // K(t,2x−t) = H(x, x−t); the product integral is 2∫_0^{x−t} H(t+s,s) H̃(x−s,x−t−s) ds
            const std::size_t L = i - j;
            f.resize(L + 1);
            for (std::size_t k = 0; k <= L; ++k) f[k] = K.H(j + k, k) * Kt.H(i - k, L - k);
            double acc = 0.0;
            const auto& w = table[L + 1];
            for (std::size_t k = 0; k <= L; ++k) acc += w[k] * f[k];
            K1[i][j] = 2.0 * K.H(i, L) + 2.0 * Kt.H(i, L) + 4.0 * acc;
        }
    });
    return CompositeKernel(h, std::move(K1));
}

double WeightedFunction::norm() const {
    if (values.empty()) return 0.0;
    const auto w = quad::weights(values.size(), h);
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j)
        acc += w[j] * values[j] * values[j] * std::exp(delta * h * static_cast<double>(j));
    return std::sqrt(std::max(acc, 0.0));
}

WeightedFunction sample_weighted(const std::function<double(double)>& f, double h, std::size_t N, double delta) {
    WeightedFunction g{h, delta, std::vector<double>(N + 1)};
    for (std::size_t j = 0; j <= N; ++j) g.values[j] = f(h * static_cast<double>(j));
    return g;
}

namespace {

void check_compatible(const CompositeKernel& K1, const WeightedFunction& g) {
    if (g.values.empty()) throw DomainError("empty function samples");
    if (std::abs(g.h - K1.h()) > 1e-12 * K1.h()) throw DomainError("function and kernel grids differ");
    if (g.values.size() > K1.N() + 1) throw DomainError("function extends beyond the composite kernel");
}

// C g on the first g.values.size() nodes.
std::vector<double> apply_C(const CompositeKernel& K1, const std::vector<std::vector<double>>& table,
                            const std::vector<double>& g) {
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        const auto& w = table[i + 1];
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += w[j] * K1(i, j) * g[j];
        out[i] = acc;
    }
    return out;
}

}  // namespace

WeightedFunction apply_B(const CompositeKernel& K1, const WeightedFunction& g) {
    check_compatible(K1, g);
    const auto table = weight_table(g.values.size() - 1, g.h);
    auto Cg = apply_C(K1, table, g.values);
    WeightedFunction out = g;
    for (std::size_t i = 0; i < Cg.size(); ++i) out.values[i] += Cg[i];
    return out;
}

InverseResult invert_B(const CompositeKernel& K1, const WeightedFunction& g, double tol) {
    check_compatible(K1, g);
    const auto table = weight_table(g.values.size() - 1, g.h);
    const double gnorm = g.norm();
    InverseResult r;
    r.h = g;
    if (gnorm == 0.0) return r;
    WeightedFunction term = g;
    int n = 0;
    for (; n < 2000; ++n) {
        term.values = apply_C(K1, table, term.values);
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;
        for (std::size_t i = 0; i < term.values.size(); ++i) r.h.values[i] += sign * term.values[i];
        const double tn = term.norm();
        if (!std::isfinite(tn) || tn > 1e100 * gnorm) throw NumericalError("Neumann series for B^{-1} diverged");
        if (tn <= tol * gnorm) break;
    }
    r.terms = n + 1;
    if (n == 2000) throw NumericalError("Neumann series for B^{-1} did not converge in 2000 terms");
    auto back = apply_B(K1, r.h);
    for (std::size_t i = 0; i < back.values.size(); ++i) back.values[i] -= g.values[i];
    r.residual = back.norm();
    return r;
}

OperatorNorms operator_norms(const CompositeKernel& K1, double delta) {
    const std::size_t n = K1.N();
    const Eigen::MatrixXd B = dense_B(K1, n);
    const Eigen::VectorXd D = sqrt_weights(n, K1.h(), delta);
    // A = D B D^{-1}; σ_max(A) and 1/σ_min(A) by power iteration on AᵀA and A^{-T}A^{-1}.
    const Eigen::MatrixXd A = D.asDiagonal() * B * D.cwiseInverse().asDiagonal();
    OperatorNorms out;
    auto power = [&](auto&& apply) {
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n + 1).normalized();
        double lambda = 0.0;
        for (int it = 0; it < 1000; ++it) {
            Eigen::VectorXd w = apply(v);
            const double next = w.norm();
            ++out.iterations;
            if (!(next > 0.0) || !std::isfinite(next)) throw NumericalError("power iteration broke down");
            v = w / next;
            if (std::abs(next - lambda) <= 1e-12 * next) return std::sqrt(next);
            lambda = next;
        }
        return std::sqrt(lambda);
    };
    out.norm_B = power([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(A.transpose() * (A * v)); });
    const auto L = A.triangularView<Eigen::Lower>();
    out.norm_B_inverse = power([&](const Eigen::VectorXd& v) {
        Eigen::VectorXd y = L.solve(v);
        return Eigen::VectorXd(L.transpose().solve(y));
    });
    return out;
}

TransferReport transfer_identity_check(const Warping& w, const Warping& wt, const std::vector<double>& kappas,
                                       KernelOptions opt, const WeylOptions& wopt) {
    const HalfLinePotential q(w), qt(wt);
    const HalfLineOperator op(q, wopt), opt_(qt, wopt);
    if (opt.U == 0.0) opt.U = std::max(default_extent(op), default_extent(opt_));
    if (opt.N == 0) opt.N = default_cells(opt.U);
    const auto K = solve_kernel(op, opt);
    const auto Kt = solve_kernel(opt_, opt);
    const auto K1 = build_K1(K, Kt);
    const std::size_t n = K1.N();
    const double h = K1.h();

    WeightedFunction dq{h, 0.5, std::vector<double>(n + 1)};
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = h * static_cast<double>(j);
        dq.values[j] = qt(x) - q(x);
    }
    const auto Bdq = apply_B(K1, dq);

    TransferReport rep;
    rep.rows.resize(kappas.size());
    parallel_for(kappas.size(), [&](std::size_t k) {
        const double kappa = kappas[k];
        if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
        const auto a = weyl_m(op, kappa), b = weyl_m(opt_, kappa);
        const auto Pa = weyl_profile(op, kappa, h, n + 1), Pb = weyl_profile(opt_, kappa, h, n + 1);
        std::vector<double> f(n + 1);
        for (std::size_t j = 0; j <= n; ++j) f[j] = dq.values[j] * Pa.P[j] * Pb.P[j];
        TransferRow row;
        row.kappa = kappa;
        row.lhs = a.S_inf_at_0 * b.S_inf_at_0 * (a.u0 - b.u0);
        row.rhs_profile = quad::laplace(f, h, 2.0 * kappa);
        row.rhs_volterra = quad::laplace(Bdq.values, h, 2.0 * kappa);
        const double dev = std::max(std::abs(row.lhs - row.rhs_profile), std::abs(row.lhs - row.rhs_volterra));
        row.mismatch = dev == 0.0 ? 0.0 : dev / std::max(std::abs(row.lhs), 1e-300);
        rep.rows[k] = row;
    });
    for (const auto& r : rep.rows) {
        rep.worst = std::max(rep.worst, r.mismatch);
        rep.worst_absolute = std::max({rep.worst_absolute, std::abs(r.lhs - r.rhs_profile), std::abs(r.lhs - r.rhs_volterra)});
    }
    return rep;
}

AFunctionReport a_function_bound_check(const HalfLineOperator& op, const std::vector<double>& kappas) {
    AFunctionReport rep;
    const auto absq = [&op](double x) { return std::abs(op.q(x)); };
    const double cut = default_extent(op);
    rep.q_l1 = quad::adaptive(absq, 0.0, cut, 1e-14) + quad::adaptive_tail(absq, cut, 1e-15);
    for (double kappa : kappas) {
        if (!(kappa > 0.5 * rep.q_l1))
            throw DomainError(fmt::format("A-function bound needs kappa > {} (half the L1 norm of q), got {}",
                                          0.5 * rep.q_l1, kappa));
        // Q² e^{αQ} e^{−2κα} decays at rate ≥ 2κ − ‖q‖₁.
        const double X = std::min(op.options().x_cap, std::max(cut, 60.0 / (2.0 * kappa - rep.q_l1)));
        const auto n = static_cast<std::size_t>(std::clamp(std::ceil(X / 0.002), 4000.0, 400000.0));
        const double h = X / static_cast<double>(n);
        std::vector<double> qs(n + 1), aq(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            qs[j] = op.q(h * static_cast<double>(j));
            aq[j] = std::abs(qs[j]);
        }
        const auto Q = quad::cumulative(aq, h);
        std::vector<double> g(n + 1);
        for (std::size_t j = 0; j <= n; ++j) g[j] = Q[j] * Q[j] * std::exp(h * static_cast<double>(j) * Q[j]);
        AFunctionRow row;
        row.kappa = kappa;
        row.lhs = std::abs(weyl_m(op, kappa).u0 + quad::laplace(qs, h, 2.0 * kappa));
        row.rhs = quad::laplace(g, h, 2.0 * kappa);
        row.holds = row.lhs <= row.rhs * (1.0 + 1e-8) + 1e-15;
        row.slack = row.lhs > 0.0 ? row.rhs / row.lhs : std::numeric_limits<double>::infinity();
        rep.all_hold = rep.all_hold && row.holds;
        rep.rows.push_back(row);
    }
    return rep;
}

void write_kernel_csv(const MarchenkoKernel& K, const std::string& path, std::size_t stride) {
    if (stride == 0) throw DomainError("stride must be positive");
    std::ofstream out(path);
    if (!out) throw DomainError(fmt::format("cannot open {} for writing", path));
    out << "x,t,K\n";
    const double h = K.h();
    for (std::size_t i = 0; i <= K.N(); i += stride)
        for (std::size_t j = 0; j <= i; j += stride)
            out << fmt::format("{:.17g},{:.17g},{:.17g}\n", h * static_cast<double>(i - j), h * static_cast<double>(i + j),
                               K.H(i, j));
    if (!out) throw NumericalError(fmt::format("write to {} failed", path));
}

}  // namespace steklov
