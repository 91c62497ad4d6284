#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <vector>

#include "steklov/error.hpp"
#include "steklov/parallel.hpp"
#include "steklov/spectrum.hpp"

using namespace steklov;

namespace {

// M(−κ²) from a second-order finite-difference boundary value problem
// −y'' + (q + κ²) y = 0, y(0) = 1, y(L) = 0, with one-sided y'(0) and one
// Richardson step.
double fd_weyl_m(const HalfLinePotential& q, double kappa, double L, int n) {
    auto solve = [&](int cells) {
        const double h = L / cells;
        const int m = cells - 1;  // unknowns y_1..y_{cells−1}
        std::vector<double> a(m, -1.0), b(m), c(m, -1.0), rhs(m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double x = (i + 1) * h;
            b[i] = 2.0 + h * h * (q(x) + kappa * kappa);
        }
        rhs[0] = 1.0;
        for (int i = 1; i < m; ++i) {  // Thomas algorithm
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        std::vector<double> y(m);
        y[m - 1] = rhs[m - 1] / b[m - 1];
        for (int i = m - 2; i >= 0; --i) y[i] = (rhs[i] - c[i] * y[i + 1]) / b[i];
        // y'(0) with y'' = (q + κ²) y: second order from y(h) Taylor
        const double v0 = q(0.0) + kappa * kappa;
        return (y[0] - 1.0 - 0.5 * h * h * v0) / h;
    };
    const double m1 = solve(n), m2 = solve(2 * n);
    return (4 * m2 - m1) / 3;
}

}  // namespace

TEST_CASE("unit ball spectra in d = 3, 4, 5") {
    const auto s3 = forward_spectrum(Warping::unit(3), TransversalSpectrum::round(3), 9);
    const std::vector<double> expect{0, 1, 1, 1, 2, 2, 2, 2, 2};
    const auto e3 = s3.expanded();
    REQUIRE(e3.size() == expect.size());
    for (std::size_t k = 0; k < expect.size(); ++k) CHECK(std::abs(e3[k] - expect[k]) < 1e-8);
    CHECK(s3.entries[0].sigma == 0.0);

    for (int d : {3, 4, 5}) {
        const auto s = forward_spectrum(Warping::unit(d), TransversalSpectrum::round(d), 400);
        for (std::size_t l = 0; l < s.entries.size(); ++l) {
            CHECK(std::abs(s.entries[l].sigma - static_cast<double>(l)) < 1e-8);
            if (l + 1 < s.entries.size()) CHECK(s.entries[l].multiplicity == round_sphere_mu(d, static_cast<int>(l)).multiplicity);
        }
    }
}

TEST_CASE("warped ball against a finite-difference Dirichlet-to-Neumann oracle") {
    const Warping w(3, 3, 4, 10.0, false, {{3, 0.05}});
    const auto s = forward_spectrum(w, TransversalSpectrum::round(3), 50);
    const HalfLinePotential q(w);
    const ConformalFactor f(w);
    for (const auto& e : s.entries) {
        const double M = fd_weyl_m(q, e.kappa, 30.0, 6000);
        const double sigma = sigma_from_m(3, f.f0(), f.f0p(), M);
        CHECK(std::abs(e.sigma - sigma) < 1e-4);
    }
}

TEST_CASE("spectral ordering and multiplicity preservation") {
    const Warping w(4, 3, 5, 20.0, false, {{3, 0.2}, {4, -0.1}});
    const auto s = forward_spectrum(w, TransversalSpectrum::round(4), 300);
    CHECK(s.entries[0].sigma == 0.0);
    CHECK(s.entries[0].multiplicity == 1);
    for (std::size_t j = 1; j < s.entries.size(); ++j) {
        CHECK(s.entries[j].sigma > s.entries[j - 1].sigma);
        if (j + 1 < s.entries.size()) CHECK(s.entries[j].multiplicity == round_sphere_mu(4, static_cast<int>(j)).multiplicity);
    }
}

TEST_CASE("result does not depend on the worker count") {
    const Warping w(3, 3, 4, 10.0, false, {{3, 0.05}});
    max_threads() = 1;
    const auto a = forward_spectrum(w, TransversalSpectrum::round(3), 200);
    max_threads() = 4;
    const auto b = forward_spectrum(w, TransversalSpectrum::round(3), 200);
    max_threads() = 0;
    CHECK(spectrum_csv(a) == spectrum_csv(b));
}

TEST_CASE("sup distance between spectra") {
    const auto ts = TransversalSpectrum::round(3);
    const auto s = forward_spectrum(Warping::unit(3), ts, 100);
    CHECK(spectrum_sup_distance(s, s, 100) == 0.0);
    auto t = s;
    t.entries[3].sigma += 1e-3;
    CHECK(spectrum_sup_distance(s, t, 100) == doctest::Approx(1e-3));

    const auto u = forward_spectrum(Warping(3, 3, 4, 10.0, false, {{3, 0.01}}), ts, 100);
    const auto a = s.expanded(100), b = u.expanded(100);
    double grid_max = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) grid_max = std::max(grid_max, std::abs(a[k] - b[k]));
    CHECK(spectrum_sup_distance(s, u, 100) == grid_max);

    const auto four = forward_spectrum(Warping::unit(4), TransversalSpectrum::round(4), 100);
    CHECK_THROWS_AS(spectrum_sup_distance(s, four, 100), DomainError);
    CHECK_THROWS_AS(spectrum_sup_distance(s, s, 1000), DomainError);
}

TEST_CASE("Weyl law for Steklov eigenvalues") {
    const auto ts = TransversalSpectrum::round(3);
    const auto unit = weyl_law_check(forward_spectrum(Warping::unit(3), ts, 400));
    CHECK(std::abs(unit.slope - 1.0) < 0.1);
    CHECK(std::isfinite(unit.residual));
    // c(1) = 1.2 through a smooth quartic: f(0) = 1.2
    const Warping w(3, 2, 4, 20.0, true, {{4, 0.2}});
    const auto s = forward_spectrum(w, ts, 400);
    CHECK(s.f0 == doctest::Approx(1.2));
    const auto fit = weyl_law_check(s);
    CHECK(std::abs(fit.slope / unit.slope - 1.0 / 1.44) < 0.05 / 1.44);
    CHECK_THROWS_AS(weyl_law_check(forward_spectrum(Warping::unit(3), ts, 50)), DomainError);
}

TEST_CASE("spectrum CSV round trip is lossless") {
    const auto s = forward_spectrum(Warping(3, 3, 4, 10.0, false, {{3, 0.05}}), TransversalSpectrum::round(3), 30);
    const char* path = "spectrum_test.csv";
    write_spectrum_csv(s, path);
    const auto t = read_spectrum_csv(path);
    std::remove(path);
    CHECK(t.dimension == 3);
    CHECK(t.f0 == s.f0);
    CHECK(t.f0p == s.f0p);
    REQUIRE(t.entries.size() == s.entries.size());
    for (std::size_t j = 0; j < s.entries.size(); ++j) {
        CHECK(t.entries[j].sigma == s.entries[j].sigma);
        CHECK(t.entries[j].kappa == s.entries[j].kappa);
        CHECK(t.entries[j].multiplicity == s.entries[j].multiplicity);
    }
    CHECK(spectrum_csv(t) == spectrum_csv(s));
}
