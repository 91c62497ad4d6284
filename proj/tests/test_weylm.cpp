#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "steklov/error.hpp"
#include "steklov/quadrature.hpp"
#include "steklov/weylm.hpp"

using namespace steklov;

namespace {

double sech2(double x) {
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

// Dirichlet eigenvalues of −y'' + q y on [0, L] with y(0) = y(L) = 0 by a
// second-order finite-difference matrix.
std::vector<double> fd_dirichlet(const std::function<double(double)>& q, double L, int n) {
    const double h = L / (n + 1);
    Eigen::VectorXd diag(n), off(n - 1);
    for (int i = 0; i < n; ++i) diag(i) = 2.0 / (h * h) + q((i + 1) * h);
    off.setConstant(-1.0 / (h * h));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    std::vector<double> neg;
    for (int i = 0; i < n; ++i)
        if (es.eigenvalues()(i) < 0) neg.push_back(es.eigenvalues()(i));
    return neg;
}

Warping sample(double a3 = 0.05, double a4 = -0.02) { return Warping(3, 3, 5, 10.0, false, {{3, a3}, {4, a4}}); }

}  // namespace

TEST_CASE("free operator: M = −κ and S_∞(0) = 1") {
    const HalfLineOperator op([](double) { return 0.0; });
    const auto a = weyl_m(op, 2.5);
    CHECK(std::abs(a.M + 2.5) < 1e-9);
    CHECK(std::abs(weyl_m(op, 1.0).S_inf_at_0 - 1.0) < 1e-9);
}

TEST_CASE("free fundamental solutions and characteristic functions") {
    const HalfLineOperator op([](double) { return 0.0; });
    const double kappa = 1.7, x = 2.3;
    const auto s = fundamental_solutions(op, -kappa * kappa, x);
    CHECK(std::abs(s[0] - std::cosh(kappa * x)) < 1e-8);
    CHECK(std::abs(s[2] - std::sinh(kappa * x) / kappa) < 1e-8);
    const auto [Delta, d] = characteristic_functions(op, -4.0);
    CHECK(Delta == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(d == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("Wronskian of the fundamental system stays 1") {
    const HalfLineOperator op{HalfLinePotential(sample())};
    for (double x : {0.5, 1.0, 3.0}) {
        const auto s = fundamental_solutions(op, -9.0, x);
        CHECK(std::abs(s[0] * s[3] - s[1] * s[2] - 1.0) < 1e-8 * (1 + x));
    }
}

TEST_CASE("Riccati route and matched Wronskian route give the same M") {
    const HalfLineOperator op(HalfLinePotential(sample(0.08, 0.03)));
    for (double kappa : {0.6, 1.0, 2.0, 4.0, 7.0}) {
        const auto [Delta, d] = characteristic_functions(op, -kappa * kappa);
        const auto w = weyl_m(op, kappa);
        CHECK(std::abs(-d / Delta - w.M) < 1e-7 * (1 + kappa));
        // Δ = −S_∞(0) with this normalisation
        CHECK(std::abs(-Delta - w.S_inf_at_0) < 1e-7);
    }
}

TEST_CASE("A-function bound at large kappa") {
    const HalfLinePotential q(sample(0.3, -0.1));
    const HalfLineOperator op(q);
    auto Q = [&](double a) { return quad::adaptive([&](double t) { return std::abs(q(t)); }, 0.0, a, 1e-13); };
    for (double kappa : {5.0, 10.0, 20.0}) {
        const auto w = weyl_m(op, kappa);
        const double lap = quad::adaptive_tail([&](double t) { return q(t) * std::exp(-2 * kappa * t); }, 0.0);
        const double rhs = quad::adaptive_tail(
            [&](double t) {
                const double Qt = Q(t);
                return Qt * Qt * std::exp(t * Qt - 2 * kappa * t);
            },
            0.0, 1e-12);
        CHECK(std::abs(w.u0 + lap) <= rhs);
    }
}

TEST_CASE("Dirichlet eigenvalues against a finite-difference matrix") {
    const HalfLineOperator zero([](double) { return 0.0; });
    CHECK(dirichlet_eigenvalues(zero, 3).empty());

    for (double depth : {2.0, 6.0, 12.0}) {
        auto q = [depth](double x) { return -depth * sech2(x); };
        const HalfLineOperator op(q);
        const auto found = dirichlet_eigenvalues(op, 3);
        const auto oracle = fd_dirichlet(q, 25.0, 6000);
        REQUIRE(found.size() == oracle.size());
        for (std::size_t i = 0; i < found.size(); ++i) CHECK(std::abs(found[i] - oracle[i]) < 1e-4);
        for (double z : found) {
            const auto [Delta, d] = characteristic_functions(op, z);
            CHECK(std::abs(Delta) < 1e-8 * std::abs(d));
        }
    }
    // −6 sech² has the odd bound state −1
    const auto six = dirichlet_eigenvalues(HalfLineOperator([](double x) { return -6.0 * sech2(x); }), 3);
    REQUIRE(six.size() == 1);
    CHECK(six[0] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("Dirichlet eigenvalues of warped potentials lie above −(d−2)²/4") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coef(-0.3, 0.3);
    for (int trial = 0; trial < 6; ++trial) {
        const int d = 3 + trial % 3;
        const Warping w(d, 2, 4, 50.0, false, {{2, coef(rng) - 0.2}, {3, coef(rng)}});
        const HalfLineOperator op(HalfLinePotential(w), WeylOptions{});
        for (double z : dirichlet_eigenvalues(op, d)) {
            CHECK(z > -0.25 * (d - 2) * (d - 2));
            CHECK(z < 0.0);
        }
    }
}

TEST_CASE("M(−κ²) is strictly decreasing in κ") {
    const HalfLineOperator op(HalfLinePotential(sample(0.2, 0.1)));
    double prev = weyl_m(op, 0.51).M;
    for (double kappa = 0.75; kappa < 30; kappa *= 1.3) {
        const double M = weyl_m(op, kappa).M;
        CHECK(M < prev);
        prev = M;
    }
}

TEST_CASE("asymptotics of M and of S_∞(0)") {
    const HalfLinePotential q(sample());
    const HalfLineOperator op(q, WeylOptions{1e-12});
    const double q0 = q(0.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double kappa = 10; kappa <= 100; kappa *= 1.25, ++n) {
        const double r = std::abs(weyl_m(op, kappa).u0 + 0.5 * q0 / kappa);
        const double x = std::log(kappa), y = std::log(r);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(std::abs(slope + 2.0) < 0.3);

    double worst = 0.0;
    for (double kappa = 1; kappa <= 50; kappa += 7)
        worst = std::max(worst, std::abs(weyl_m(op, kappa).S_inf_at_0 - 1.0) * (kappa + 1));
    CHECK(std::isfinite(worst));
    // (κ+1)(S_∞(0) − 1) tends to K(0,0) = ½∫q
    const double half_int = 0.5 * quad::adaptive_tail([&](double t) { return q(t); }, 0.0);
    const double tail = (weyl_m(op, 200.0).S_inf_at_0 - 1.0) * 201;
    CHECK(std::abs(tail - half_int) < 0.05 * std::abs(half_int));
}

TEST_CASE("argument checks") {
    const HalfLineOperator op([](double) { return 0.0; });
    CHECK_THROWS_AS(weyl_m(op, 0.0), DomainError);
    CHECK_THROWS_AS(characteristic_functions(op, 1.0), DomainError);
    CHECK_THROWS_AS(HalfLineOperator([](double) { return 0.0; }, WeylOptions{0.0}), DomainError);
}

TEST_CASE("Riccati blow-up is reported with its location") {
    // deep well: a Dirichlet eigenvalue near −1 lies above −κ² = −0.25
    const HalfLineOperator op([](double x) { return -6.0 * sech2(x); });
    bool threw = false;
    try {
        weyl_m(op, 0.5);
    } catch (const BlowUpError& e) {
        threw = true;
        CHECK(e.location() >= 0.0);
    }
    CHECK(threw);
}
