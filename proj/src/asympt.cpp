#include "steklov/asympt.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "steklov/error.hpp"
#include "steklov/series.hpp"

namespace steklov {
namespace {

Series jet_series(std::span<const double> jet, int N) {
    if (N < 0) throw DomainError("expansion order must be >= 0");
    if (static_cast<int>(jet.size()) < N + 1)
        throw DomainError(fmt::format("jet of order {} is too short for N = {}", static_cast<int>(jet.size()) - 1, N));
    return Series::from_derivatives(jet.subspan(0, static_cast<std::size_t>(N) + 1));
}

}  // namespace

BetaCoefficients beta_recursion(std::span<const double> jet, int N) {
    // β_j is needed to order N − j; β_j' then has order N − j − 1.
    std::vector<Series> b;
    b.push_back(0.5 * jet_series(jet, N));
    for (int j = 0; j < N; ++j) {
        Series next = b[j].derivative();  // order N − j − 1
        for (int l = 0; l <= j - 1; ++l) next -= b[l] * b[j - 1 - l];
        b.push_back(0.5 * next);
    }
    BetaCoefficients out;
    for (const auto& s : b) out.beta.push_back(s[0]);
    return out;
}

BetaCoefficients beta_recursion_as_printed(std::span<const double> jet, int N) {
    std::vector<Series> b;
    b.push_back(0.5 * jet_series(jet, N));
    for (int j = 0; j < N; ++j) {
        Series next = b[j].derivative();
        for (int l = 0; l <= j; ++l) next += b[l] * b[j - l];
        b.push_back(0.5 * next);
    }
    BetaCoefficients out;
    for (const auto& s : b) out.beta.push_back(s[0]);
    return out;
}

double expansion_sigma(const BetaCoefficients& beta, double f0, double f0p, int d, double kappa, int N) {
    if (N < 0 || N >= static_cast<int>(beta.beta.size()))
        throw DomainError(fmt::format("expansion order {} exceeds available coefficients", N));
    double tail = 0.0;
    for (int j = N; j >= 0; --j) tail = (tail + beta.beta[j]) / kappa;
    return (d - 2) * f0p / (f0 * f0 * f0) + (kappa + tail) / (f0 * f0);
}

BoundaryEstimate boundary_data_from_spectrum(std::span<const double> sigma, std::span<const double> kappa, int d,
                                             int terms) {
    if (sigma.size() != kappa.size()) throw DomainError("sigma and kappa lists differ in length");
    if (terms < 3) throw DomainError("boundary fit needs at least 3 terms");
    const auto n = static_cast<Eigen::Index>(sigma.size());
    if (n < 50) throw DomainError(fmt::format("boundary fit needs >= 50 entries, got {}", n));
    // Columns scaled by powers of κ_ref for conditioning.
    double kref = 0.0;
    for (double k : kappa) kref = std::max(kref, k);
    Eigen::MatrixXd X(n, terms);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = kappa[i] / kref;
        X(i, 0) = t;
        X(i, 1) = 1.0;
        double p = 1.0;
        for (int c = 2; c < terms; ++c) {
            p /= t;
            X(i, c) = p;
        }
        y(i) = sigma[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    BoundaryEstimate est;
    est.condition = sv(0) / sv(sv.size() - 1);
    if (!(est.condition < 1e14)) throw NumericalError(fmt::format("ill-conditioned boundary fit (cond {:.3g})", est.condition));
    const Eigen::VectorXd beta = svd.solve(y);
    const Eigen::VectorXd res = y - X * beta;
    const double dof = std::max<double>(1.0, static_cast<double>(n - terms));
    const double s2 = res.squaredNorm() / dof;
    est.rms_residual = std::sqrt(res.squaredNorm() / static_cast<double>(n));
    const Eigen::MatrixXd Vs = svd.matrixV() * sv.cwiseInverse().asDiagonal();
    Eigen::MatrixXd cov = s2 * Vs * Vs.transpose();

    // unscale: a = β0/kref, b = β1, c = β2·kref
    const double a = beta(0) / kref, b = beta(1), c = beta(2) * kref;
    if (!(a > 0)) throw NumericalError("fitted slope is not positive");
    est.f0 = 1.0 / std::sqrt(a);
    est.f0p = b * std::pow(a, -1.5) / (d - 2);
    est.q0 = 2.0 * c / a;
    // delta method in (β0, β1, β2)
    Eigen::Matrix3d C = cov.topLeftCorner(3, 3);
    Eigen::Vector3d g_f0(-0.5 * std::pow(a, -1.5) / kref, 0.0, 0.0);
    Eigen::Vector3d g_f0p(-1.5 * b * std::pow(a, -2.5) / (d - 2) / kref, std::pow(a, -1.5) / (d - 2), 0.0);
    Eigen::Vector3d g_q0(-2.0 * c / (a * a) / kref, 0.0, 2.0 * kref / a);
    est.se_f0 = std::sqrt(std::max(0.0, g_f0.dot(C * g_f0)));
    est.se_f0p = std::sqrt(std::max(0.0, g_f0p.dot(C * g_f0p)));
    est.se_q0 = std::sqrt(std::max(0.0, g_q0.dot(C * g_q0)));
    est.used = static_cast<int>(n);
    return est;
}

BoundaryEstimate boundary_data_from_spectrum(const SteklovSpectrum& s, double kappa_min, int terms) {
    std::vector<double> sig, kap;
    for (const auto& e : s.entries)
        if (e.kappa >= kappa_min) {
            sig.push_back(e.sigma);
            kap.push_back(e.kappa);
        }
    return boundary_data_from_spectrum(sig, kap, s.dimension, terms);
}

ResidualSlope expansion_residual_slope(const SteklovSpectrum& s, const BetaCoefficients& beta, int N, std::size_t l_lo,
                                       std::size_t l_hi) {
    if (l_hi >= s.entries.size() || l_lo + 2 > l_hi) throw DomainError("residual slope range outside the spectrum");
    const auto n = static_cast<Eigen::Index>(l_hi - l_lo + 1);
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (std::size_t l = l_lo; l <= l_hi; ++l) {
        const auto& e = s.entries[l];
        const double r = std::abs(e.sigma - expansion_sigma(beta, s.f0, s.f0p, s.dimension, e.kappa, N));
        const auto i = static_cast<Eigen::Index>(l - l_lo);
        X(i, 0) = std::log(e.kappa);
        X(i, 1) = 1.0;
        y(i) = std::log(std::max(r, 1e-300));
    }
    const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
    return {N, c(0), c(1)};
}

}  // namespace steklov
