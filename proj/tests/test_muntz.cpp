#include "doctest.h"

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include "steklov/error.hpp"
#include "steklov/muntz.hpp"

using namespace steklov;
using boost::multiprecision::cpp_rational;

namespace {

std::vector<double> moments_of(const std::function<double(double)>& f, const MuntzSequence& l) {
    const auto rule = unit_interval_rule();
    std::vector<double> m(l.size(), 0.0);
    for (std::size_t j = 0; j < l.size(); ++j)
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            m[j] += rule.weights[i] * f(rule.nodes[i]) * std::pow(rule.nodes[i], l[j]);
    return m;
}

// ‖f − P f‖² with P the L² projection onto span{t^{λ_j}}, solved from the exact
// Gram matrix 1/(λ_i+λ_j+1) in 50-digit arithmetic.
double gram_residual(double f_norm2, const std::vector<double>& moments, const MuntzSequence& l) {
    using M = Eigen::Matrix<wide, Eigen::Dynamic, Eigen::Dynamic>;
    using V = Eigen::Matrix<wide, Eigen::Dynamic, 1>;
    const auto n = static_cast<Eigen::Index>(l.size());
    M G(n, n);
    V b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        b(i) = moments[i];
        for (Eigen::Index j = 0; j < n; ++j) G(i, j) = wide(1) / (wide(l[i]) + wide(l[j]) + 1);
    }
    const V c = G.fullPivLu().solve(b);
    return static_cast<double>(wide(f_norm2) - b.dot(c));
}

}  // namespace

TEST_CASE("Gram coefficients for integer exponents are shifted Legendre") {
    const auto basis = gram_coefficients(MuntzSequence::arithmetic(0.0, 0, 10).shifted(0.0));
    // λ_k = 2k here; the Legendre case is λ_k = k
    const auto leg = gram_coefficients(MuntzSequence([] {
        std::vector<double> l;
        for (int k = 0; k <= 10; ++k) l.push_back(k);
        return l;
    }()));
    CHECK(static_cast<double>(leg.coefficient(0, 0)) == doctest::Approx(1.0));
    CHECK(static_cast<double>(leg.coefficient(1, 0)) == doctest::Approx(-std::sqrt(3.0)));
    CHECK(static_cast<double>(leg.coefficient(1, 1)) == doctest::Approx(2 * std::sqrt(3.0)));
    CHECK(static_cast<double>(leg.coefficient(2, 0)) == doctest::Approx(std::sqrt(5.0)));
    CHECK(static_cast<double>(leg.coefficient(2, 1)) == doctest::Approx(-6 * std::sqrt(5.0)));
    CHECK(static_cast<double>(leg.coefficient(2, 2)) == doctest::Approx(6 * std::sqrt(5.0)));
    CHECK(leg.sign(2, 1) == -1);
    CHECK(leg.log_magnitude(2, 1) == doctest::Approx(std::log(6 * std::sqrt(5.0))));
    const auto b0 = gram_coefficients(MuntzSequence({0.75, 3.0}));
    CHECK(static_cast<double>(b0.coefficient(0, 0)) == doctest::Approx(std::sqrt(2.5)));
    CHECK(basis.size() == 11);

    // exact rational comparison with the factorial closed form
    std::vector<std::int64_t> ints;
    for (int k = 0; k <= 10; ++k) ints.push_back(k);
    for (std::size_t m = 0; m <= 10; ++m)
        for (std::size_t j = 0; j <= m; ++j)
            CHECK(exact_gram_ratio(ints, m, j) == cpp_rational(legendre_coefficient(m, j)));
}

TEST_CASE("factorial bound on Legendre coefficients") {
    CHECK(legendre_bound_check(10).holds);
    const auto r = legendre_bound_check(30);
    CHECK(r.holds);
    CHECK(r.worst_ratio <= 1.0);
    CHECK(r.worst_ratio > 0.0);
    CHECK_THROWS_AS(legendre_bound_check(31), DomainError);
}

TEST_CASE("orthonormality up to n = 20") {
    for (double b : {0.75, 1.5}) {
        const auto basis = gram_coefficients(MuntzSequence::arithmetic(b, 0, 20));
        CHECK(basis.rule().nodes.size() >= 2000);
        CHECK(basis.orthonormality_error() < 1e-8);
    }
    std::vector<double> l;
    for (int k = 0; k <= 20; ++k) l.push_back(k);
    CHECK(gram_coefficients(MuntzSequence(l)).orthonormality_error() < 1e-8);
}

TEST_CASE("log form survives overflow") {
    // tightly clustered exponents make Π 1/(λ_j − λ_r) huge
    std::vector<double> l;
    for (int k = 0; k <= 60; ++k) l.push_back(1e-7 * k);
    const auto basis = gram_coefficients(MuntzSequence(l));
    CHECK(basis.overflow());
    for (std::size_t j : {0, 17, 30, 60}) {
        double expect = 0.5 * std::log(2 * l[60] + 1);
        for (int r = 0; r < 60; ++r) expect += std::log(l[j] + l[r] + 1);
        for (int r = 0; r <= 60; ++r)
            if (r != static_cast<int>(j)) expect -= std::log(std::abs(l[j] - l[r]));
        CHECK(std::isfinite(basis.log_magnitude(60, j)));
        CHECK(basis.log_magnitude(60, j) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(basis.sign(60, j) == ((60 - j) % 2 == 0 ? 1 : -1));
    }
}

TEST_CASE("Blaschke index: closed form for separated sequences") {
    for (double b : {0.5, 1.0, 2.0})
        for (int n = 1; n <= 20; ++n) {
            const auto l = MuntzSequence::arithmetic(b, 1, n);
            const auto e = blaschke_index(l);
            CHECK(e.separated);
            CHECK(std::abs(e.value - (b + 1) / (2 * n + b + 1)) < 1e-10);
            REQUIRE(e.closed_form.has_value());
            CHECK(std::abs(*e.closed_form - e.value) < 1e-10);
            // λ_0 = 0 does not change the product
            std::vector<double> with0{0.0};
            with0.insert(with0.end(), l.exponents().begin(), l.exponents().end());
            CHECK(std::abs(blaschke_index(MuntzSequence(with0)).value - e.value) < 1e-14);
        }
    // b = 1, n = 4: (2/4)(4/6)(6/8)(8/10)
    CHECK(blaschke_index(MuntzSequence::arithmetic(1.0, 1, 4)).value == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("Blaschke index of a clustered sequence peaks off the real axis") {
    const MuntzSequence l({0.5, 0.9, 1.1, 1.3});
    const auto e = blaschke_index(l);
    CHECK_FALSE(e.separated);
    CHECK(e.argmax > 0.0);
    // brute-force maximum on a fine grid
    double best = 0.0;
    for (double y = 0.0; y <= 13.0; y += 1e-4) best = std::max(best, std::exp(blaschke_log_modulus(l, y)));
    CHECK(e.value >= best - 1e-12);
    CHECK(e.value <= best + 1e-8);
}

TEST_CASE("projection from moments") {
    const auto l = MuntzSequence::arithmetic(0.75, 0, 6);
    const auto basis = gram_coefficients(l);
    const auto m2 = moments_of([&](double t) { return basis.evaluate(2, t); }, l);
    const auto p2 = project_from_moments(basis, m2);
    for (std::size_t k = 0; k < basis.size(); ++k) CHECK(std::abs(p2.coefficients[k] - (k == 2 ? 1.0 : 0.0)) < 1e-8);

    std::vector<double> ints;
    for (int k = 0; k <= 5; ++k) ints.push_back(k);
    const MuntzSequence li(ints);
    const auto bi = gram_coefficients(li);
    const auto pt = project_from_moments(bi, moments_of([](double t) { return t; }, li));
    for (double t : {0.01, 0.3, 0.77, 1.0}) CHECK(std::abs(pt(t) - t) < 1e-10);

    const auto l8 = MuntzSequence::arithmetic(1.5, 0, 8);
    const auto b8 = gram_coefficients(l8);
    auto f = [](double t) { return t * t * t * std::sin(t); };
    const auto m8 = moments_of(f, l8);
    const auto p8 = project_from_moments(b8, m8);
    const double fn2 = moments_of([&](double t) { return f(t) * f(t); }, MuntzSequence({0.0}))[0];
    const double from_moments = std::sqrt(std::max(0.0, fn2 - p8.norm_squared));
    const double direct = std::sqrt(std::max(0.0, gram_residual(fn2, m8, l8)));
    CHECK(std::abs(from_moments - direct) < 1e-7);
    CHECK(p8.cancelled.empty());
    CHECK_THROWS_AS(project_from_moments(b8, std::vector<double>(3, 0.0)), DomainError);
}

TEST_CASE("truncation selector") {
    const double b = 0.75;
    const auto c = truncation_selector(1e-6, b);
    CHECK(selector_g(c.n, b) <= 1.0 / std::sqrt(1e-6));
    CHECK(selector_g(c.n + 1, b) > 1.0 / std::sqrt(1e-6));
    int prev = 0;
    std::vector<double> ratio;
    for (int e = 4; e <= 40; ++e) {
        const double eps = std::pow(10.0, -e);
        const auto t = truncation_selector(eps, b, 1000);
        CHECK(t.n >= prev);  // ε decreases along the loop
        prev = t.n;
        if (e <= 12) ratio.push_back(t.uncapped / std::log(1.0 / eps));
    }
    // n ≈ log(1/ε) / (2 log(9M/2)) + O(log log)
    const double a = 4.5 * std::max(2.0, 4 * b + 1);
    CHECK(std::abs(truncation_selector(1e-300, b, 1000).uncapped / std::log(1e300) - 0.5 / std::log(a)) < 0.01);
    CHECK(std::abs(ratio.back() - ratio[ratio.size() - 2]) < std::abs(ratio[1] - ratio[0]));
    CHECK_THROWS_AS(truncation_selector(1.0, b), DomainError);
    CHECK(truncation_selector(1e-15, b).n <= 40);
    CHECK(truncation_selector(0.5, b).n == 0);
}

TEST_CASE("Jackson bound") {
    const auto l = MuntzSequence::arithmetic(1.5, 1, 8);
    const auto j1 = jackson_bound(l, 1, 2.0);
    CHECK(j1.bound == doctest::Approx(40 * blaschke_index(l).value * 2.0).epsilon(1e-12));
    for (int r : {1, 2}) {
        const auto jb = jackson_bound(l, r, 3.0);
        CHECK(jb.bound == doctest::Approx(jackson_bound_arithmetic(8, 1.5, r, 3.0)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(jackson_bound(MuntzSequence({0.5, 2.5}), 2, 1.0), DomainError);

    // least-squares sup error of t^{3.7} never exceeds the r = 2 bound
    for (int n : {4, 8, 16}) {
        const auto ls = MuntzSequence::arithmetic(1.5, 1, n);
        using M = Eigen::Matrix<wide, Eigen::Dynamic, Eigen::Dynamic>;
        using V = Eigen::Matrix<wide, Eigen::Dynamic, 1>;
        M G(n, n);
        V rhs(n);
        for (int i = 0; i < n; ++i) {
            rhs(i) = wide(1) / (wide(ls[i]) + wide(3.7) + 1);
            for (int k = 0; k < n; ++k) G(i, k) = wide(1) / (wide(ls[i]) + wide(ls[k]) + 1);
        }
        const V c = G.fullPivLu().solve(rhs);
        double sup = 0.0;
        for (double t = 0.0; t <= 1.0; t += 1e-3) {
            wide p = 0;
            for (int i = 0; i < n; ++i) p += c(i) * pow(wide(t), wide(ls[i]));
            sup = std::max(sup, std::abs(std::pow(t, 3.7) - static_cast<double>(p)));
        }
        CHECK(sup <= jackson_bound(ls, 2, 3.7 * 2.7).bound);
    }
}

TEST_CASE("denseness: best L2 error of sqrt(t) decreases with n") {
    double prev = 1.0;
    for (int n = 1; n <= 12; ++n) {
        const auto l = MuntzSequence::arithmetic(0.5, 0, n);
        std::vector<double> m(l.size());
        for (std::size_t j = 0; j < l.size(); ++j) m[j] = 1.0 / (l[j] + 1.5);
        const double err = gram_residual(0.5, m, l);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("singular sequence") {
    // d = 3 thins at expanded index k², so κ_i = sqrt(i) + 1/2 gives ν_k = k + 1/2
    std::vector<Eigenpair> entries;
    for (int i = 0; i <= 3000; ++i) {
        const double kap = std::sqrt(static_cast<double>(i)) + 0.5;
        entries.push_back({kap * kap - 0.25, 1});
    }
    const auto ts = TransversalSpectrum::custom(3, entries);
    const auto s = singular_sequence(ts, 1.0, 20);
    CHECK(s.lambda.separated());
    CHECK(s.c == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.N == 2);
    CHECK(s.theta == doctest::Approx(1.0 / s.B));
    CHECK(s.B == doctest::Approx(s.c * s.N));
    CHECK(s.c * s.N > 3 * s.C);
    for (std::size_t k = 1; k < s.lambda.size(); ++k) CHECK(s.lambda[k] - s.lambda[k - 1] == doctest::Approx(4.0));

    // ν_k = k + 1/2 + 0.3 sin k
    std::vector<Eigenpair> wobble;
    for (int i = 0; i <= 6000; ++i) {
        const double r = std::sqrt(static_cast<double>(i));
        const double kap = r + 0.5 + 0.3 * std::sin(r);
        wobble.push_back({kap * kap - 0.25, 1});
    }
    const auto tw = TransversalSpectrum::custom(3, wobble);
    const auto sw = singular_sequence(tw, 0.8, 12);
    CHECK(sw.lambda.separated());
    CHECK(sw.lambda.min_gap() >= 2.0);

    // ε_∞ ~ n^{−1/B}: log–log slope of the Blaschke index
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t n = 4; n <= 12; ++n) {
        std::vector<double> head(sw.lambda.exponents().begin(), sw.lambda.exponents().begin() + n);
        const double x = std::log(static_cast<double>(n)), y = std::log(blaschke_index(MuntzSequence(head)).value);
        sx += x, sy += y, sxx += x * x, sxy += x * y, ++cnt;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    CHECK(slope < 0.0);
    CHECK(std::abs(slope + 1.0 / sw.B) < 0.5 / sw.B);
    CHECK_THROWS_AS(singular_sequence(tw, 1.6, 10), DomainError);
    CHECK_THROWS_AS(singular_sequence(tw, 1.0, 500), DomainError);
}
