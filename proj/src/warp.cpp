#include "steklov/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "steklov/error.hpp"

namespace steklov {
namespace {

Series exp_series(int order, double rate) {
    // e^{rate s}
    Series e(order, 1.0);
    for (int k = 1; k <= order; ++k) e[k] = e[k - 1] * rate / k;
    return e;
}

}  // namespace

Warping::Warping(int dimension, int p, int m, double A, bool smooth, const std::map<int, double>& coefficients,
                 std::vector<TruncatedTerm> truncated)
    : d_(dimension), p_(p), m_(m), A_(A), smooth_(smooth), truncated_(std::move(truncated)) {
    if (d_ < 3) throw DomainError(fmt::format("dimension must be >= 3, got {}", d_));
    if (p_ < 2) throw DomainError(fmt::format("flatness order p must be >= 2, got {}", p_));
    if (m_ < 3 || p_ > m_ - 1) throw DomainError(fmt::format("need m >= 3 and p <= m-1 (p={}, m={})", p_, m_));
    if (!(A_ > 0) || !std::isfinite(A_)) throw DomainError("bound A must be positive");
    int deg = 0;
    for (const auto& [k, a] : coefficients) {
        if (k < p_) throw DomainError(fmt::format("coefficient index {} below p = {}", k, p_));
        if (!std::isfinite(a)) throw DomainError(fmt::format("coefficient a_{} is not finite", k));
        if (smooth_ && (k % 2 == 1) && a != 0.0)
            throw DomainError(fmt::format("smooth warping must have a_{} = 0", k));
        if (a != 0.0) deg = std::max(deg, k);
    }
    poly_.assign(static_cast<std::size_t>(deg) + 1, 0.0);
    poly_[0] = 1.0;
    for (const auto& [k, a] : coefficients)
        if (a != 0.0) poly_[static_cast<std::size_t>(k)] = a;
    for (const auto& t : truncated_) {
        if (smooth_) throw DomainError("truncated terms are not allowed for smooth warpings");
        if (!(t.knot > 0.0 && t.knot <= 1.0)) throw DomainError("truncated term knot must lie in (0,1]");
        if (t.power <= m_) throw DomainError(fmt::format("truncated term power must exceed m = {}", m_));
        if (!std::isfinite(t.amplitude)) throw DomainError("truncated term amplitude is not finite");
    }
}

Warping Warping::unit(int dimension, int p, int m, double A) { return Warping(dimension, p, m, A, false, {}); }

std::map<int, double> Warping::coefficients() const {
    std::map<int, double> out;
    for (int k = p_; k <= degree(); ++k)
        if (poly_[k] != 0.0) out[k] = poly_[k];
    return out;
}

Warping Warping::with_coefficients(const std::map<int, double>& coefficients) const {
    return Warping(d_, p_, m_, A_, smooth_, coefficients, truncated_);
}

Series Warping::taylor(double r0, int order) const {
    // Taylor shift of the polynomial by repeated synthetic division.
    Series s(order);
    std::vector<double> b(poly_);
    const int n = degree();
    for (int k = 0; k <= order && k <= n; ++k) {
        for (int j = n - 1; j >= k; --j) b[j] += r0 * b[j + 1];
        s[k] = b[k];
    }
    if (!truncated_.empty()) {
        const Series r = Series::variable(order, r0);
        const Series rp = r.pow(p_);
        for (const auto& t : truncated_) {
            if (r0 >= t.knot) continue;
            Series gap(order, t.knot - r0);
            if (order >= 1) gap[1] = -1.0;
            s += t.amplitude * (rp * gap.pow(t.power));
        }
    }
    return s;
}

std::vector<double> Warping::eval(double r, int order) const {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError(fmt::format("r = {} outside [0,1]", r));
    if (order < 0 || order > m_) throw DomainError(fmt::format("derivative order {} outside [0, m={}]", order, m_));
    return taylor(r, order).derivatives();
}

void Warping::value3(double r, double& c, double& c1, double& c2) const {
    const int n = degree();
    c = poly_[n];
    c1 = 0.0;
    c2 = 0.0;
    for (int j = n - 1; j >= 0; --j) {
        c2 = c2 * r + c1;
        c1 = c1 * r + c;
        c = c * r + poly_[j];
    }
    c2 *= 2.0;
    for (const auto& t : truncated_) {
        if (r >= t.knot) continue;
        // g = r^p u^K, u = knot − r
        const double u = t.knot - r;
        const double K = t.power, P = p_;
        const double base = std::pow(r, p_ - 2) * std::pow(u, t.power - 2);
        const double g = base * r * r * u * u;
        const double g1 = base * r * u * (P * u - K * r);
        const double g2 = base * (P * (P - 1) * u * u - 2 * P * K * r * u + K * (K - 1) * r * r);
        c += t.amplitude * g;
        c1 += t.amplitude * g1;
        c2 += t.amplitude * g2;
    }
}

ConformalFactor::ConformalFactor(Warping w) : w_(std::move(w)) {
    double c, c1, c2;
    w_.value3(1.0, c, c1, c2);
    f0_ = c;
    f0p_ = -c1 - 0.5 * c;
}

double ConformalFactor::value(double x) const {
    double c, c1, c2;
    w_.value3(std::exp(-x), c, c1, c2);
    return c * std::exp(-0.5 * x);
}

double ConformalFactor::derivative(double x) const {
    const double r = std::exp(-x);
    double c, c1, c2;
    w_.value3(r, c, c1, c2);
    return (-r * c1 - 0.5 * c) * std::exp(-0.5 * x);
}

Series ConformalFactor::taylor(double x0, int order) const {
    const double r0 = std::exp(-x0);
    const Series r = r0 * exp_series(order, -1.0);
    const Series c = Series::compose(w_.taylor(r0, order), r);
    return std::exp(-0.5 * x0) * (c * exp_series(order, -0.5));
}

HalfLinePotential::HalfLinePotential(Warping w) : w_(std::move(w)) {}

double HalfLinePotential::operator()(double x) const {
    const double r = std::exp(-x);
    double c, c1, c2;
    w_.value3(r, c, c1, c2);
    const double d = w_.dimension();
    const double g = r * c1 / c;
    return (d - 2) * ((d - 3) * g * g + r * r * c2 / c + (d - 1) * g);
}

Series HalfLinePotential::taylor(double x0, int order) const {
    const double r0 = std::exp(-x0);
    const Series r = r0 * exp_series(order, -1.0);
    const Series cj = w_.taylor(r0, order + 2);
    const Series c1j = cj.derivative();
    const Series c2j = c1j.derivative();
    const Series c = Series::compose(cj, r);
    const Series c1 = Series::compose(c1j, r);
    const Series c2 = Series::compose(c2j, r);
    const Series inv = c.reciprocal();
    const Series g = r * c1 * inv;
    const double d = w_.dimension();
    return (d - 2) * ((d - 3) * (g * g) + r * r * c2 * inv + (d - 1) * g);
}

std::vector<double> HalfLinePotential::derivatives(double x, int order) const {
    return taylor(x, order).derivatives();
}

std::function<double(double)> HalfLinePotential::function() const {
    return [self = *this](double x) { return self(x); };
}

std::vector<double> potential_jet_at_zero(const HalfLinePotential& q, int order) {
    const int m = q.warping().m();
    if (order < 0 || order > m - 2)
        throw DomainError(fmt::format("jet order {} exceeds m - 2 = {}", order, m - 2));
    return q.derivatives(0.0, order);
}

double potential_from_conformal_factor(const ConformalFactor& f, double x) {
    const int d = f.warping().dimension();
    const Series F = f.taylor(x, 2).pow(d - 2);
    return 2.0 * F[2] / F[0] - 0.25 * (d - 2) * (d - 2);
}

AdmissibilityReport admissibility_check(const Warping& w) {
    AdmissibilityReport rep;
    try {
        const int m = w.m();
        constexpr int points = 1001;
        std::vector<double> sup_c(m + 1, 0.0), sup_inv(m + 1, 0.0);
        rep.min_c = std::numeric_limits<double>::infinity();
        for (int i = 0; i < points; ++i) {
            const double r = static_cast<double>(i) / (points - 1);
            const Series c = w.taylor(r, m);
            rep.min_c = std::min(rep.min_c, c[0]);
            if (!(c[0] > 0.0)) {
                rep.positive = false;
                continue;
            }
            const auto dc = c.derivatives();
            const auto di = c.reciprocal().derivatives();
            for (int k = 0; k <= m; ++k) {
                sup_c[k] = std::max(sup_c[k], std::abs(dc[k]));
                sup_inv[k] = std::max(sup_inv[k], std::abs(di[k]));
            }
        }
        for (int k = 0; k <= m; ++k) {
            rep.norm_c += sup_c[k];
            rep.norm_inv_c += sup_inv[k];
        }
        if (!rep.positive) {
            rep.member = false;
            rep.violations.push_back(fmt::format("c(r) not positive on [0,1] (min {:.6g})", rep.min_c));
        } else if (rep.norm_c + rep.norm_inv_c > w.A()) {
            rep.member = false;
            rep.violations.push_back(fmt::format("|c|_C^{} + |1/c|_C^{} = {:.6g} exceeds A = {:.6g}", m, m,
                                                 rep.norm_c + rep.norm_inv_c, w.A()));
        }
        if (rep.positive) {
            const HalfLinePotential q(w);
            const int p = w.p();
            for (int i = 0; i <= 240; ++i) {
                const double x = 0.05 * i;
                const auto dq = q.derivatives(x, m - 2);
                for (double v : dq) rep.fitted_CA = std::max(rep.fitted_CA, std::abs(v) * std::exp(p * x));
            }
            if (!std::isfinite(rep.fitted_CA)) {
                rep.member = false;
                rep.violations.push_back("potential decay constant is not finite");
            }
        }
    } catch (const std::exception& e) {
        rep.member = false;
        rep.violations.push_back(e.what());
    }
    return rep;
}

}  // namespace steklov
