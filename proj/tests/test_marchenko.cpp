#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "steklov/error.hpp"
#include "steklov/marchenko.hpp"
#include "steklov/quadrature.hpp"

using namespace steklov;

namespace {

// q = −2 sech²(x + c) has S_∞(x) = e^{−κx}(κ + tanh(x + c))/(κ + 1), hence
// K(x,t) = (tanh(x + c) − 1) e^{x−t}.
constexpr double shift = 0.5;
double bargmann(double x) {
    const double ch = std::cosh(x + shift);
    return -2.0 / (ch * ch);
}
double bargmann_K(double x, double t) { return (std::tanh(x + shift) - 1.0) * std::exp(x - t); }

Warping sample(double a3 = 0.05, double a4 = -0.02) { return Warping(3, 3, 5, 10.0, false, {{3, a3}, {4, a4}}); }

}  // namespace

TEST_CASE("kernel of a reflectionless potential") {
    const auto K = solve_kernel(bargmann, KernelOptions{20.0, 1000});
    double worst = 0.0;
    for (std::size_t i = 0; i <= K.N(); i += 7)
        for (std::size_t j = 0; j <= i; j += 5) {
            const double u = K.h() * i, v = K.h() * j;
            worst = std::max(worst, std::abs(K.H(i, j) - bargmann_K(u - v, u + v)));
        }
    CHECK(worst < 1e-7);
    CHECK(K.sweeps() > 2);
    // off-grid interpolation
    for (double x : {0.013, 0.77, 2.31})
        for (double dt : {0.0, 0.051, 1.7}) CHECK(std::abs(K.K(x, x + dt) - bargmann_K(x, x + dt)) < 1e-7);
    CHECK(K.K(15.0, 30.0) == 0.0);
    CHECK_THROWS_AS(K.K(1.0, 0.5), DomainError);
}

TEST_CASE("diagonal equals half the tail integral of q") {
    const HalfLineOperator op{HalfLinePotential(sample())};
    const auto K = solve_kernel(op);
    for (double x = 0.0; x <= 5.0; x += 0.25) {
        const double tail = 0.5 * quad::adaptive_tail([&](double s) { return op.q(s); }, x);
        CHECK(std::abs(K.K(x, x) - tail) < 1e-6);
    }
}

TEST_CASE("kernel reproduces the decaying solution") {
    const HalfLineOperator op(HalfLinePotential(sample(0.2, -0.1)), WeylOptions{1e-12});
    const auto K = solve_kernel(op);
    for (double kappa : {2.0, 5.0, 10.0}) {
        const double S = weyl_m(op, kappa).S_inf_at_0;
        CHECK(std::abs(kernel_weyl_solution_at_0(K, kappa) - S) < 1e-5);
    }
    const HalfLineOperator bop(bargmann, WeylOptions{1e-12});
    const auto Kb = solve_kernel(bop);
    for (double kappa : {2.0, 5.0})
        CHECK(std::abs(kernel_weyl_solution_at_0(Kb, kappa) - (kappa + std::tanh(shift)) / (kappa + 1)) < 1e-7);
}

TEST_CASE("kernel decays like e^{-p u}") {
    for (int p : {2, 3}) {
        const Warping w(3, p, 5, 10.0, false, {{p, 0.1}});
        const auto K = solve_kernel(HalfLineOperator(HalfLinePotential(w)));
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (std::size_t i = 0; i <= K.N(); ++i) {
            const double u = K.h() * i;
            if (u < 2.0 || u > K.U() - 2.0) continue;
            double sup = 0.0;
            for (std::size_t j = 0; j <= i; ++j) sup = std::max(sup, std::abs(K.H(i, j)));
            if (sup < 1e-13) continue;
            sx += u, sy += std::log(sup), sxx += u * u, sxy += u * std::log(sup), ++n;
        }
        REQUIRE(n > 20);
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(std::abs(slope + p) < 0.1 * p);
    }
}

TEST_CASE("B round trip and direct triangular solve") {
    const HalfLineOperator a(HalfLinePotential(sample(0.2, -0.1))), b(HalfLinePotential(sample(-0.1, 0.05)));
    KernelOptions opt{10.0, 500};
    const auto K1 = build_K1(solve_kernel(a, opt), solve_kernel(b, opt));
    const auto g = sample_weighted([](double x) { return std::exp(-x) * std::sin(3 * x); }, K1.h(), K1.N());
    const auto Bg = apply_B(K1, g);
    const auto back = invert_B(K1, Bg);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.values.size(); ++j) worst = std::max(worst, std::abs(back.h.values[j] - g.values[j]));
    CHECK(worst < 1e-6);
    CHECK(back.residual < 1e-10);

    // forward substitution with the same discretisation
    const std::size_t n = K1.N();
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n + 1, n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        const auto w = quad::weights(i + 1, K1.h());
        for (std::size_t j = 0; j <= i; ++j) B(i, j) += w[j] * K1(i, j);
    }
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(g.values.data(), n + 1);
    const Eigen::VectorXd direct = B.triangularView<Eigen::Lower>().solve(rhs);
    const auto neumann = invert_B(K1, g);
    for (std::size_t j = 0; j <= n; ++j) CHECK(std::abs(neumann.h.values[j] - direct(j)) < 1e-10);

    const auto norms = operator_norms(K1);
    CHECK(norms.norm_B >= Bg.norm() / g.norm() * (1 - 1e-9));
    CHECK(norms.norm_B_inverse >= g.norm() / Bg.norm() * (1 - 1e-9));
    CHECK(std::isfinite(norms.norm_B_inverse));

    const auto Z = CompositeKernel::zero(K1.h(), 50);
    const auto zn = operator_norms(Z);
    CHECK(zn.norm_B == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(zn.norm_B_inverse == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("composite kernel of a pair with one free member") {
    // K̃ = 0 leaves K₁(x,t) = 2K(t, 2x−t).
    KernelOptions opt{20.0, 1000};
    const auto K = solve_kernel(bargmann, opt);
    const auto Z = solve_kernel([](double) { return 0.0; }, opt);
    const auto K1 = build_K1(K, Z, 5.0);
    for (std::size_t i = 0; i <= K1.N(); i += 37)
        for (std::size_t j = 0; j <= i; j += 11) {
            const double x = K1.h() * i, t = K1.h() * j;
            CHECK(std::abs(K1(i, j) - 2.0 * bargmann_K(t, 2 * x - t)) < 1e-7);
        }
    CHECK_THROWS_AS(build_K1(K, Z, 30.0), DomainError);
    CHECK_THROWS_AS(build_K1(K, solve_kernel(bargmann, KernelOptions{20.0, 900})), DomainError);
}

TEST_CASE("transfer identity for admissible pairs") {
    const auto rep = transfer_identity_check(sample(0.2, -0.1), sample(-0.1, 0.05), {3.0, 6.0, 12.0});
    for (const auto& r : rep.rows) {
        CHECK(std::abs(r.lhs) > 1e-6);
        CHECK(r.mismatch < 1e-5);
    }
    const auto same = transfer_identity_check(sample(), sample(), {3.0, 6.0});
    CHECK(same.worst_absolute < 1e-9);

    const auto coarse = transfer_identity_check(sample(0.2, -0.1), sample(-0.1, 0.05), {6.0}, KernelOptions{0.0, 100});
    const auto fine = transfer_identity_check(sample(0.2, -0.1), sample(-0.1, 0.05), {6.0}, KernelOptions{0.0, 800});
    CHECK(fine.worst < coarse.worst);
}

TEST_CASE("A-function bound") {
    const HalfLineOperator op(HalfLinePotential(sample(0.2, -0.1)), WeylOptions{1e-12});
    const auto rep = a_function_bound_check(op, {2.0, 5.0, 10.0, 20.0, 50.0});
    CHECK(rep.all_hold);
    CHECK(rep.q_l1 > 0.0);
    for (const auto& r : rep.rows) CHECK(r.rhs >= r.lhs);
    CHECK_THROWS_AS(a_function_bound_check(op, {0.25 * rep.q_l1}), DomainError);
}

TEST_CASE("kernel csv") {
    const auto K = solve_kernel(bargmann, KernelOptions{4.0, 40});
    const std::string path = "marchenko_kernel_test.csv";
    write_kernel_csv(K, path, 4);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,t,K");
    int rows = 0;
    while (std::getline(in, line)) {
        double x, t, k;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &t, &k) == 3);
        CHECK(x <= t);
        CHECK(std::abs(k - bargmann_K(x, t)) < 1e-4);
        ++rows;
    }
    CHECK(rows == 66);
    std::remove(path.c_str());
}
