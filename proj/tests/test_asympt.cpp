#include "doctest.h"

#include <cmath>
#include <vector>

#include "steklov/asympt.hpp"
#include "steklov/error.hpp"

using namespace steklov;

namespace {

// Coefficients of −sqrt(κ² + q0) = −κ − Σ c_j κ^{−j−1}: binomial series.
std::vector<double> constant_potential_coefficients(double q0, int N) {
    std::vector<double> c(N + 1, 0.0);
    // sqrt(1+x) = Σ binom(1/2, n) x^n, x = q0/κ²
    double binom = 1.0;
    for (int n = 1; 2 * n - 1 <= N + 1; ++n) {
        binom *= (0.5 - (n - 1)) / n;
        if (2 * n - 2 <= N) c[2 * n - 2] = binom * std::pow(q0, n);
    }
    return c;
}

}  // namespace

TEST_CASE("beta recursion: zero and constant potentials") {
    const std::vector<double> zero(6, 0.0);
    for (double b : beta_recursion(zero, 5).beta) CHECK(b == 0.0);

    const double q0 = 0.7;
    const std::vector<double> jet{q0, 0, 0, 0, 0, 0, 0};
    const auto b = beta_recursion(jet, 6);
    const auto exact = constant_potential_coefficients(q0, 6);
    for (int j = 0; j <= 6; ++j) CHECK(b.beta[j] == doctest::Approx(exact[j]).epsilon(1e-14));
    CHECK(b.beta[0] == doctest::Approx(q0 / 2));
    CHECK(b.beta[2] == doctest::Approx(-q0 * q0 / 8));
}

TEST_CASE("printed recursion reproduces its own hand evaluation") {
    const double q0 = 0.7;
    const std::vector<double> jet{q0, 0, 0};
    const auto b = beta_recursion_as_printed(jet, 2);
    CHECK(b.beta[0] == doctest::Approx(q0 / 2));
    CHECK(b.beta[1] == doctest::Approx(q0 * q0 / 8));
    CHECK(b.beta[2] == doctest::Approx(q0 * q0 * q0 / 16));
    const std::vector<double> g{0.3, -1.2};
    CHECK(beta_recursion_as_printed(g, 1).beta[1] == doctest::Approx(-1.2 / 4 + 0.09 / 8));
    // ...but M = −sqrt(κ² + q0) has no κ^{-2} term
    CHECK(std::abs(b.beta[1] - constant_potential_coefficients(q0, 2)[1]) > 0.05);
}

TEST_CASE("beta recursion: low orders in closed form") {
    const std::vector<double> jet{0.3, -1.2, 2.5, 0.4};
    const auto b = beta_recursion(jet, 3);
    CHECK(b.beta[1] == doctest::Approx(-1.2 / 4));
    CHECK(b.beta[2] == doctest::Approx(2.5 / 8 - 0.09 / 8));
    // β3 = (β2' − 2β0β1)/2 = q'''/16 − q q'/8 − ... evaluated by expansion of the Riccati equation
    const double q = 0.3, q1 = -1.2, q3 = 0.4;
    CHECK(b.beta[3] == doctest::Approx(q3 / 16 - q * q1 / 8 - 2 * (q / 2) * (q1 / 4) / 2));
}

TEST_CASE("beta_j depends only on the jet up to order j") {
    std::vector<double> jet{0.4, 0.1, -0.3, 0.8, 1.1, -2.0};
    const auto a = beta_recursion(jet, 5);
    for (int j = 0; j < 5; ++j) {
        auto perturbed = jet;
        for (std::size_t k = j + 1; k < jet.size(); ++k) perturbed[k] += 3.0;
        const auto b = beta_recursion(perturbed, 5);
        for (int i = 0; i <= j; ++i) CHECK(b.beta[i] == a.beta[i]);
    }
    CHECK_THROWS_AS(beta_recursion(std::vector<double>{1.0, 2.0}, 3), DomainError);
}

TEST_CASE("expansion_sigma on the unit ball and the definition of the tail") {
    const BetaCoefficients zero{{0, 0, 0}};
    for (int l = 0; l < 10; ++l) CHECK(expansion_sigma(zero, 1.0, -0.5, 3, l + 0.5, 2) == doctest::Approx(l));
    const BetaCoefficients b{{0.2, -0.1, 0.05}};
    const double kappa = 3.0, f0 = 1.1;
    const double diff = expansion_sigma(b, f0, -0.4, 3, kappa, 2) - expansion_sigma(b, f0, -0.4, 3, kappa, 0);
    CHECK(diff == doctest::Approx((-0.1 / (kappa * kappa) + 0.05 / (kappa * kappa * kappa)) / (f0 * f0)));
}

TEST_CASE("consistency with the Weyl function: residual order") {
    const Warping w(3, 3, 6, 10.0, false, {{3, 0.05}, {4, 0.03}});
    const HalfLinePotential q(w);
    const HalfLineOperator op(q, WeylOptions{1e-12});
    const auto beta = beta_recursion(potential_jet_at_zero(q, 3), 3);
    for (int N = 0; N <= 2; ++N) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (double kappa = 20; kappa <= 200; kappa *= 1.2, ++n) {
            double tail = 0.0;
            for (int j = N; j >= 0; --j) tail = (tail + beta.beta[j]) / kappa;
            const double r = std::abs(weyl_m(op, kappa).u0 + tail);
            const double x = std::log(kappa), y = std::log(r);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(std::abs(slope + (N + 2)) < 0.3);
    }
}

TEST_CASE("boundary data from exact and synthetic spectra") {
    const auto ts = TransversalSpectrum::round(3);
    const auto unit = forward_spectrum(Warping::unit(3), ts, 120 * 120);
    const auto e = boundary_data_from_spectrum(unit, 10.0);
    CHECK(std::abs(e.f0 - 1.0) < 1e-6);
    CHECK(std::abs(e.f0p + 0.5) < 1e-6);

    // synthetic: expansion itself with f0 = 1.1
    const BetaCoefficients b{{0.3, -0.2, 0.1, 0.05}};
    std::vector<double> sig, kap;
    for (int l = 10; l < 100; ++l) {
        kap.push_back(l + 0.5);
        sig.push_back(expansion_sigma(b, 1.1, -0.7, 3, l + 0.5, 3));
    }
    const auto s = boundary_data_from_spectrum(sig, kap, 3, 6);
    CHECK(std::abs(s.f0 - 1.1) < 1e-4);
    CHECK(std::abs(s.f0p + 0.7) < 1e-4);
    CHECK(std::abs(s.q0 - 0.6) < 1e-4);

    const Warping w(3, 3, 5, 10.0, false, {{3, 0.05}});
    const auto fw = forward_spectrum(w, ts, 120 * 120);
    const auto est = boundary_data_from_spectrum(fw, 10.0);
    const double q0 = potential_jet_at_zero(HalfLinePotential(w), 0)[0];
    CHECK(std::abs(est.q0 - q0) < 1e-3);
    CHECK(est.se_q0 < 1e-3);
    CHECK(std::abs(est.f0 - ConformalFactor(w).f0()) < 1e-8);

    CHECK_THROWS_AS(boundary_data_from_spectrum(std::vector<double>(10, 1.0), std::vector<double>(10, 1.0), 3), DomainError);
}
