#include "steklov/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace steklov::quad {
namespace {

// ∫_0^h y^n e^{-s y} dy for n = 0..3.
std::array<double, 4> exp_moments(double h, double s) {
    std::array<double, 4> I{};
    const double sh = s * h;
    if (std::abs(sh) < 0.5) {
        for (int n = 0; n < 4; ++n) {
            // Σ_k (-s)^k h^{n+k+1} / (k! (n+k+1))
            double term = std::pow(h, n + 1);
            double sum = term / (n + 1);
            for (int k = 1; k < 40; ++k) {
                term *= -sh / k;
                const double add = term / (n + k + 1);
                sum += add;
                if (std::abs(add) < 1e-18 * std::abs(sum)) break;
            }
            I[n] = sum;
        }
    } else {
        const double e = std::exp(-sh);
        I[0] = -std::expm1(-sh) / s;
        double hn = 1.0;
        for (int n = 1; n < 4; ++n) {
            hn *= h;
            I[n] = (n * I[n - 1] - hn * e) / s;
        }
    }
    return I;
}

// Weights ∫_0^h ℓ_m(y) e^{-s y} dy for Lagrange basis on the given node offsets.
template <std::size_t K>
std::array<double, K> panel_weights(const std::array<double, K>& nodes, double h, double s) {
    static_assert(K >= 2 && K <= 4);
    const auto I = exp_moments(h, s);
    std::array<double, K> w{};
    for (std::size_t m = 0; m < K; ++m) {
        // monomial coefficients of Π_{i≠m} (y - o_i)/(o_m - o_i)
        std::array<double, 4> c{1.0, 0.0, 0.0, 0.0};
        double denom = 1.0;
        int deg = 0;
        for (std::size_t i = 0; i < K; ++i) {
            if (i == m) continue;
            for (int k = deg + 1; k >= 1; --k) c[k] = c[k - 1] - nodes[i] * c[k];
            c[0] = -nodes[i] * c[0];
            ++deg;
            denom *= nodes[m] - nodes[i];
        }
        double acc = 0.0;
        for (int k = 0; k <= deg; ++k) acc += c[k] * I[k];
        w[m] = acc / denom;
    }
    return w;
}

// Accumulates per-panel weights; panel j contributes to nodes through `emit`.
template <class Emit>
void for_each_panel(std::size_t points, double h, double s, Emit&& emit) {
    if (points < 2) return;
    const std::size_t n = points - 1;
    if (n == 1) {
        const auto w = panel_weights<2>({0.0, h}, h, s);
        emit(0, std::size_t{0}, w.data(), 2);
        return;
    }
    if (n == 2) {
        const auto w0 = panel_weights<3>({0.0, h, 2 * h}, h, s);
        const auto w1 = panel_weights<3>({-h, 0.0, h}, h, s);
        emit(0, std::size_t{0}, w0.data(), 3);
        emit(1, std::size_t{0}, w1.data(), 3);
        return;
    }
    const auto first = panel_weights<4>({0.0, h, 2 * h, 3 * h}, h, s);
    const auto mid = panel_weights<4>({-h, 0.0, h, 2 * h}, h, s);
    const auto last = panel_weights<4>({-2 * h, -h, 0.0, h}, h, s);
    emit(0, std::size_t{0}, first.data(), 4);
    for (std::size_t j = 1; j + 1 < n; ++j) emit(j, j - 1, mid.data(), 4);
    emit(n - 1, n - 3, last.data(), 4);
}

}  // namespace

std::vector<double> cumulative(std::span<const double> f, double h) {
    const std::size_t m = f.size();
    std::vector<double> out(m, 0.0);
    if (m < 2) return out;
    const std::size_t n = m - 1;
    auto panel = [&](std::size_t j) -> double {
        if (n == 1) return 0.5 * h * (f[0] + f[1]);
        if (n == 2) {
            return j == 0 ? h / 12.0 * (5 * f[0] + 8 * f[1] - f[2])
                          : h / 12.0 * (-f[0] + 8 * f[1] + 5 * f[2]);
        }
        if (j == 0) return h / 24.0 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
        if (j == n - 1) return h / 24.0 * (f[n - 3] - 5 * f[n - 2] + 19 * f[n - 1] + 9 * f[n]);
        return h / 24.0 * (-f[j - 1] + 13 * f[j] + 13 * f[j + 1] - f[j + 2]);
    };
    for (std::size_t j = 0; j < n; ++j) out[j + 1] = out[j] + panel(j);
    return out;
}

double integral(std::span<const double> f, double h) {
    const auto w = weights(f.size(), h);
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += w[j] * f[j];
    return acc;
}

std::vector<double> weights(std::size_t points, double h) {
    return laplace_weights(points, h, 0.0);
}

std::vector<double> laplace_weights(std::size_t points, double h, double s) {
    std::vector<double> w(points, 0.0);
    for_each_panel(points, h, s, [&](std::size_t panel, std::size_t start, const double* pw, int k) {
        const double scale = std::exp(-s * h * static_cast<double>(panel));
        for (int m = 0; m < k; ++m) w[start + m] += scale * pw[m];
    });
    return w;
}

double laplace(std::span<const double> f, double h, double s) {
    const auto w = laplace_weights(f.size(), h, s);
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += w[j] * f[j];
    return acc;
}

double interpolate(std::span<const double> f, double x0, double h, double x) {
    const std::size_t m = f.size();
    if (m == 0) throw std::invalid_argument("interpolate: empty samples");
    if (m == 1) return f[0];
    const double pos = (x - x0) / h;
    const std::size_t k = std::min<std::size_t>(4, m);
    long start = static_cast<long>(std::floor(pos)) - (k == 4 ? 1 : 0);
    start = std::clamp<long>(start, 0, static_cast<long>(m - k));
    double acc = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        double l = 1.0;
        const double na = static_cast<double>(start) + static_cast<double>(a);
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            const double nb = static_cast<double>(start) + static_cast<double>(b);
            l *= (pos - nb) / (na - nb);
        }
        acc += l * f[static_cast<std::size_t>(start) + a];
    }
    return acc;
}

double adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

double adaptive_tail(const std::function<double(double)>& f, double a, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, a, std::numeric_limits<double>::infinity(), 15, tol);
}

Rule gauss_legendre(double a, double b, int panels) {
    using G = boost::math::quadrature::gauss<double, 20>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    const double len = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * len;
        const double half = 0.5 * len;
        for (std::size_t i = 0; i < x.size(); ++i) {
            r.nodes.push_back(mid - half * x[i]);
            r.weights.push_back(half * w[i]);
            r.nodes.push_back(mid + half * x[i]);
            r.weights.push_back(half * w[i]);
        }
    }
    return r;
}

Rule graded_unit_interval(int panels, double ratio) {
    using G = boost::math::quadrature::gauss<double, 20>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    double hi = 1.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = (p == panels - 1) ? 0.0 : hi * ratio;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < x.size(); ++i) {
            r.nodes.push_back(mid - half * x[i]);
            r.weights.push_back(half * w[i]);
            r.nodes.push_back(mid + half * x[i]);
            r.weights.push_back(half * w[i]);
        }
        hi = lo;
    }
    return r;
}

}  // namespace steklov::quad
