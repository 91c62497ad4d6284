#include "steklov/muntz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "steklov/error.hpp"

namespace steklov {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

MuntzSequence::MuntzSequence(std::vector<double> exponents) : lambda_(std::move(exponents)) {
    if (lambda_.empty()) throw DomainError("Müntz sequence is empty");
    for (std::size_t k = 0; k < lambda_.size(); ++k) {
        if (!std::isfinite(lambda_[k]) || lambda_[k] < 0.0)
            throw DomainError(fmt::format("exponent {} = {} is not a nonnegative real", k, lambda_[k]));
        if (k > 0 && !(lambda_[k] > lambda_[k - 1]))
            throw DomainError(fmt::format("exponents must be strictly increasing (index {})", k));
    }
}

MuntzSequence MuntzSequence::arithmetic(double b, int first, int last) {
    if (last < first) throw DomainError("empty index range");
    std::vector<double> l;
    for (int k = first; k <= last; ++k) l.push_back(2.0 * k + b);
    return MuntzSequence(std::move(l));
}

bool MuntzSequence::separated() const noexcept { return min_gap() >= 2.0 - 1e-12; }

double MuntzSequence::min_gap() const noexcept {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < lambda_.size(); ++k) g = std::min(g, lambda_[k] - lambda_[k - 1]);
    return g;
}

MuntzSequence MuntzSequence::shifted(double s) const {
    std::vector<double> l(lambda_);
    for (double& x : l) x -= s;
    if (l.front() < 0.0) throw DomainError(fmt::format("shift {} makes exponents negative", s));
    return MuntzSequence(std::move(l));
}

quad::Rule unit_interval_rule() {
    // [0, 0.12·2^{-30}], 30 geometric panels up to 0.12, then 88 panels of width 0.01.
    quad::Rule r;
    auto append = [&r](double a, double b) {
        const auto p = quad::gauss_legendre(a, b, 1);
        r.nodes.insert(r.nodes.end(), p.nodes.begin(), p.nodes.end());
        r.weights.insert(r.weights.end(), p.weights.begin(), p.weights.end());
    };
    double lo = 0.12 * std::ldexp(1.0, -30);
    append(0.0, lo);
    for (int i = 0; i < 30; ++i, lo *= 2.0) append(lo, 2.0 * lo);
    for (int i = 0; i < 88; ++i) append(0.12 + 0.01 * i, 0.12 + 0.01 * (i + 1));
    return r;
}

MuntzBasis gram_coefficients(const MuntzSequence& lambda) {
    MuntzBasis b;
    b.seq_ = lambda;
    const std::size_t n = lambda.size();
    b.C_.resize(n);
    b.logmag_.resize(n);
    b.sign_.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        b.C_[m].resize(m + 1);
        b.logmag_[m].resize(m + 1);
        b.sign_[m].resize(m + 1);
        const wide norm = sqrt(wide(2) * wide(lambda[m]) + 1);
        for (std::size_t j = 0; j <= m; ++j) {
            wide c = norm;
            const wide lj(lambda[j]);
            for (std::size_t r = 0; r < m; ++r) c *= lj + wide(lambda[r]) + 1;
            for (std::size_t r = 0; r <= m; ++r)
                if (r != j) c /= lj - wide(lambda[r]);
            b.C_[m][j] = c;
            b.sign_[m][j] = c < 0 ? -1 : 1;
            b.logmag_[m][j] = static_cast<double>(log(abs(c)));
            if (b.logmag_[m][j] > std::log(std::numeric_limits<double>::max())) b.overflow_ = true;
        }
    }
    if (b.overflow_) spdlog::warn("Müntz coefficients exceed the double range; use the log form");
    b.rule_ = unit_interval_rule();
    return b;
}

std::vector<double> MuntzBasis::evaluate(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError(fmt::format("t = {} outside [0,1]", t));
    const std::size_t n = size();
    std::vector<wide> p(n);
    const wide tw(t);
    for (std::size_t j = 0; j < n; ++j) p[j] = seq_[j] == 0.0 ? wide(1) : pow(tw, wide(seq_[j]));
    std::vector<double> out(n);
    for (std::size_t m = 0; m < n; ++m) {
        wide acc = 0;
        for (std::size_t j = 0; j <= m; ++j) acc += C_[m][j] * p[j];
        out[m] = static_cast<double>(acc);
    }
    return out;
}

double MuntzBasis::evaluate(std::size_t m, double t) const {
    if (m >= size()) throw DomainError("basis index out of range");
    return evaluate(t)[m];
}

std::vector<std::vector<double>> MuntzBasis::gram_matrix() const {
    const std::size_t n = size();
    std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
        const auto L = evaluate(rule_.nodes[i]);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t c = 0; c <= a; ++c) G[a][c] += rule_.weights[i] * L[a] * L[c];
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < a; ++c) G[c][a] = G[a][c];
    return G;
}

double MuntzBasis::orthonormality_error() const {
    const auto G = gram_matrix();
    double e = 0.0;
    for (std::size_t a = 0; a < G.size(); ++a)
        for (std::size_t c = 0; c < G.size(); ++c) e = std::max(e, std::abs(G[a][c] - (a == c ? 1.0 : 0.0)));
    return e;
}

cpp_rational exact_gram_ratio(std::span<const std::int64_t> lambda, std::size_t m, std::size_t j) {
    if (m >= lambda.size() || j > m) throw DomainError("index out of range");
    cpp_rational c = 1;
    for (std::size_t r = 0; r < m; ++r) c *= cpp_rational(lambda[j] + lambda[r] + 1);
    for (std::size_t r = 0; r <= m; ++r) {
        if (r == j) continue;
        if (lambda[j] == lambda[r]) throw DomainError("exponents must be distinct");
        c /= cpp_rational(lambda[j] - lambda[r]);
    }
    return c;
}

namespace {
cpp_int factorial(std::size_t n) {
    cpp_int f = 1;
    for (std::size_t i = 2; i <= n; ++i) f *= i;
    return f;
}
}  // namespace

cpp_int legendre_coefficient(std::size_t m, std::size_t j) {
    if (j > m) throw DomainError("j must not exceed m");
    const cpp_int fj = factorial(j);
    cpp_int v = factorial(m + j) / (factorial(m - j) * fj * fj);
    return ((m - j) % 2 == 0) ? v : cpp_int(-v);
}

LegendreBoundReport legendre_bound_check(int n) {
    if (n < 0 || n > 30) throw DomainError(fmt::format("legendre_bound_check needs 0 <= n <= 30, got {}", n));
    LegendreBoundReport rep;
    for (int m = 0; m <= n; ++m)
        for (int j = 0; j <= m; ++j) {
            const cpp_int c = abs(legendre_coefficient(m, j));
            cpp_int bound = 1;
            for (int i = 0; i < m + j; ++i) bound *= 3;
            if (c > bound) rep.holds = false;
            rep.worst_ratio = std::max(rep.worst_ratio, static_cast<double>(cpp_rational(c, bound)));
        }
    return rep;
}

double blaschke_log_modulus(const MuntzSequence& lambda, double y) {
    const double y2 = y * y;
    double acc = -0.5 * std::log1p(y2);
    for (double l : lambda.exponents()) {
        if (l == 0.0) continue;
        acc += 0.5 * (std::log((1.0 - l) * (1.0 - l) + y2) - std::log((1.0 + l) * (1.0 + l) + y2));
    }
    return acc;
}

BlaschkeIndex blaschke_index(const MuntzSequence& lambda) {
    BlaschkeIndex out;
    const auto& l = lambda.exponents();
    const double Y = 10.0 * std::max(1.0, l.back());
    // coarse scan with quadratic spacing, then golden section around the best node
    constexpr int S = 4000;
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    auto node = [&](int i) { return Y * std::pow(static_cast<double>(i) / S, 2); };
    for (int i = 0; i <= S; ++i) {
        const double v = blaschke_log_modulus(lambda, node(i));
        if (v > best_v) best_v = v, best = i;
    }
    double a = node(std::max(0, best - 1)), b = node(std::min(S, best + 1));
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = blaschke_log_modulus(lambda, x1), f2 = blaschke_log_modulus(lambda, x2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + b); ++it) {
        if (f1 < f2) {
            a = x1, x1 = x2, f1 = f2;
            x2 = a + phi * (b - a);
            f2 = blaschke_log_modulus(lambda, x2);
        } else {
            b = x2, x2 = x1, f2 = f1;
            x1 = b - phi * (b - a);
            f1 = blaschke_log_modulus(lambda, x1);
        }
    }
    const double ym = 0.5 * (a + b);
    double v = blaschke_log_modulus(lambda, ym);
    out.argmax = ym;
    if (best_v > v) v = best_v, out.argmax = node(best);
    out.value = std::exp(v);

    out.separated = lambda.separated() && (l.front() == 0.0 || l.front() >= 2.0);
    if (out.separated) {
        double p = 1.0;
        for (double x : l)
            if (x > 0.0) p *= (x - 1.0) / (x + 1.0);
        out.closed_form = std::abs(p);
        if (std::abs(*out.closed_form - out.value) > 1e-10 * std::max(1.0, out.value))
            spdlog::warn("Blaschke index {} differs from the closed form {}", out.value, *out.closed_form);
    }
    return out;
}

double Projection::operator()(double t) const {
    if (!sequence) throw DomainError("projection has no basis attached");
    if (!(t > 0.0 && t <= 1.0)) throw DomainError(fmt::format("t = {} outside (0,1]", t));
    wide acc = 0;
    const wide tw(t);
    for (std::size_t j = 0; j < monomial.size(); ++j) acc += monomial[j] * pow(tw, wide((*sequence)[j]));
    return static_cast<double>(acc);
}

Projection project_from_moments(const MuntzBasis& basis, std::span<const double> moments) {
    const std::size_t n = basis.size();
    if (moments.size() < n)
        throw DomainError(fmt::format("need {} moments, got {}", n, moments.size()));
    Projection p;
    p.sequence = &basis.sequence();
    p.coefficients.resize(n);
    p.monomial.assign(n, wide(0));
    for (std::size_t k = 0; k < n; ++k) {
        wide acc = 0, mag = 0;
        for (std::size_t j = 0; j <= k; ++j) {
            const wide term = basis.coefficient(k, j) * wide(moments[j]);
            acc += term;
            mag += abs(term);
        }
        p.coefficients[k] = static_cast<double>(acc);
        if (mag > 0 && abs(acc) < wide(1e-12) * mag) p.cancelled.push_back(k);
        for (std::size_t j = 0; j <= k; ++j) p.monomial[j] += acc * basis.coefficient(k, j);
        p.norm_squared += p.coefficients[k] * p.coefficients[k];
    }
    if (!p.cancelled.empty())
        spdlog::warn("{} projection coefficients lost more than 12 digits to cancellation", p.cancelled.size());
    return p;
}

double selector_g(double t, double b) {
    const double M = std::max(2.0, 4.0 * b + 1.0);
    const double a = 4.5 * M;
    return 1.5 / std::sqrt(a * a - 1.0) * std::sqrt(2.0 * t + 1.0) * std::pow(a, t + 1.0);
}

TruncationChoice truncation_selector(double eps, double b, int cap) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError(fmt::format("noise level must lie in (0,1), got {}", eps));
    TruncationChoice c;
    c.M = std::max(2.0, 4.0 * b + 1.0);
    const double target = -0.5 * std::log(eps);  // log(1/sqrt ε)
    auto lg = [&](double t) { return std::log(selector_g(t, b)); };
    if (lg(0.0) > target) {
        c.n = 0;
        c.uncapped = 0.0;
        c.g_n = selector_g(0.0, b);
        return c;
    }
    double lo = 0.0, hi = 1.0;
    while (lg(hi) <= target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lg(mid) <= target ? lo : hi) = mid;
    }
    c.uncapped = lo;
    c.n = static_cast<int>(std::floor(lo));
    if (c.n > cap) {
        c.n = cap;
        c.capped = true;
    }
    c.g_n = selector_g(c.n, b);
    return c;
}

JacksonBound jackson_bound(const MuntzSequence& lambda_star, int r, double f_deriv_sup) {
    if (r < 1) throw DomainError("Jackson order r must be >= 1");
    if (!(lambda_star[0] > r - 1)) throw DomainError(fmt::format("Jackson bound needs λ_1 > r − 1 = {}", r - 1));
    if (!(f_deriv_sup >= 0.0)) throw DomainError("derivative bound must be nonnegative");
    JacksonBound jb;
    double prod = 1.0;
    for (int k = 0; k < r; ++k) {
        const double e = blaschke_index(lambda_star.shifted(k)).value;
        jb.indices.push_back(e);
        prod *= e;
    }
    jb.bound = std::pow(40.0, r) * prod * f_deriv_sup;
    return jb;
}

double jackson_bound_arithmetic(int n, double b, int r, double f_deriv_sup) {
    if (r < 1 || n < 1) throw DomainError("need r >= 1 and n >= 1");
    if (!(b >= r - 1)) throw DomainError(fmt::format("closed form needs b >= r − 1 = {}", r - 1));
    double prod = 1.0;
    for (int k = 0; k < r; ++k) prod *= (b - k + 1.0) / (2.0 * n + b - k + 1.0);
    return std::pow(40.0, r) * prod * f_deriv_sup;
}

SingularSequence singular_sequence(const TransversalSpectrum& ts, double alpha, std::size_t length) {
    if (!(alpha > 0.5 && alpha < 1.5)) throw DomainError(fmt::format("alpha must lie in (1/2, 3/2), got {}", alpha));
    if (length < 2) throw DomainError("singular sequence needs length >= 2");
    const int d = ts.dimension();
    const auto fit = weyl_constant(ts);
    SingularSequence s;
    s.c = fit.constant;
    s.C = fit.residual;
    s.alpha = alpha;
    int N = 1;
    while (!(s.c * N > 3.0 * s.C) || s.c * N - 2.0 * s.C < 1.0) ++N;

    const auto total = ts.total_count();
    for (;; ++N) {
        const auto top = static_cast<double>((length - 1) * static_cast<std::size_t>(N));
        const auto need = static_cast<std::int64_t>(std::llround(std::pow(top, d - 1))) + 1;
        if (total && need > *total)
            throw DomainError(fmt::format("transversal spectrum has {} entries, {} needed for length {}", *total, need, length));
        const auto lad = kappa_ladder(ts, need);
        std::vector<double> l(length);
        for (std::size_t k = 0; k < length; ++k) {
            const auto idx = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(k * N), d - 1)));
            l[k] = 2.0 * lad.kappa[idx] + alpha - 1.0;
        }
        MuntzSequence seq(std::move(l));
        if (seq.separated()) {
            s.lambda = std::move(seq);
            break;
        }
        spdlog::info("singular sequence with N = {} not separated (min gap {}); increasing N", N, seq.min_gap());
        if (N > 1000) throw NumericalError("no separating thinning factor found");
    }
    s.N = N;
    s.B = s.c * N;
    s.theta = 1.0 / s.B;
    return s;
}

}  // namespace steklov
