#include "doctest.h"

#include <cmath>

#include "steklov/series.hpp"

using steklov::Series;

TEST_CASE("product and reciprocal of truncated series") {
    // (1 + s)(1 − s + s² − s³) = 1 + O(s⁴)
    Series a({1.0, 1.0, 0.0, 0.0});
    Series inv = a.reciprocal();
    CHECK(inv[0] == doctest::Approx(1.0));
    CHECK(inv[1] == doctest::Approx(-1.0));
    CHECK(inv[2] == doctest::Approx(1.0));
    CHECK(inv[3] == doctest::Approx(-1.0));
    Series one = a * inv;
    CHECK(one[0] == doctest::Approx(1.0));
    for (int k = 1; k <= 3; ++k) CHECK(std::abs(one[k]) < 1e-15);
}

TEST_CASE("composition reproduces the Taylor series of exp(sin s)") {
    // exp around 0 composed with sin s: 1 + s + s²/2 + 0 s³ − s⁴/8
    const int n = 4;
    Series e(n, 1.0);
    for (int k = 1; k <= n; ++k) e[k] = e[k - 1] / k;
    Series sn({0.0, 1.0, 0.0, -1.0 / 6.0, 0.0});
    Series r = Series::compose(e, sn);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(1.0));
    CHECK(r[2] == doctest::Approx(0.5));
    CHECK(std::abs(r[3]) < 1e-15);
    CHECK(r[4] == doctest::Approx(-1.0 / 8.0));
}

TEST_CASE("derivatives and from_derivatives round trip") {
    const std::vector<double> d{2.0, -1.0, 6.0, 24.0};
    Series s = Series::from_derivatives(d);
    CHECK(s[2] == doctest::Approx(3.0));
    CHECK(s[3] == doctest::Approx(4.0));
    const auto back = s.derivatives();
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(back[k] == doctest::Approx(d[k]));
}

TEST_CASE("reciprocal of a series with zero constant term is rejected") {
    Series s(std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(s.reciprocal(), std::domain_error);
}
