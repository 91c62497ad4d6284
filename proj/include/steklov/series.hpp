#pragma once

// Truncated power series in one variable s, Σ_{k=0}^{order} a_k s^k.
// Used for exact Taylor-mode differentiation of the warping function, the
// effective potential and the β recursion.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace steklov {

class Series {
public:
    Series() = default;
    explicit Series(int order, double constant = 0.0) : a_(static_cast<std::size_t>(order) + 1, 0.0) {
        if (order < 0) throw std::invalid_argument("Series: negative order");
        a_[0] = constant;
    }
    explicit Series(std::vector<double> coeffs) : a_(std::move(coeffs)) {
        if (a_.empty()) throw std::invalid_argument("Series: empty coefficient list");
    }

    /// The series of x0 + s.
    static Series variable(int order, double x0) {
        Series s(order, x0);
        if (order >= 1) s.a_[1] = 1.0;
        return s;
    }

    /// Taylor coefficients from derivative values f^{(k)}(x0).
    static Series from_derivatives(std::span<const double> derivs) {
        std::vector<double> c(derivs.begin(), derivs.end());
        double fact = 1.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (k > 0) fact *= static_cast<double>(k);
            c[k] /= fact;
        }
        return Series(std::move(c));
    }

    int order() const noexcept { return static_cast<int>(a_.size()) - 1; }
    double operator[](std::size_t k) const { return a_[k]; }
    double& operator[](std::size_t k) { return a_[k]; }
    const std::vector<double>& coefficients() const noexcept { return a_; }

    /// k! a_k, i.e. the derivatives at the expansion point.
    std::vector<double> derivatives() const {
        std::vector<double> d(a_);
        double fact = 1.0;
        for (std::size_t k = 1; k < d.size(); ++k) {
            fact *= static_cast<double>(k);
            d[k] *= fact;
        }
        return d;
    }

    Series truncated(int order) const {
        Series r(order);
        for (int k = 0; k <= order && k <= this->order(); ++k) r.a_[k] = a_[k];
        return r;
    }

    /// d/ds, one order lower.
    Series derivative() const {
        if (order() == 0) return Series(0);
        Series r(order() - 1);
        for (int k = 0; k <= r.order(); ++k) r.a_[k] = (k + 1) * a_[k + 1];
        return r;
    }

    Series reciprocal() const {
        if (a_[0] == 0.0) throw std::domain_error("Series::reciprocal: zero constant term");
        Series r(order());
        r.a_[0] = 1.0 / a_[0];
        for (int k = 1; k <= order(); ++k) {
            double acc = 0.0;
            for (int j = 1; j <= k; ++j) acc += a_[j] * r.a_[k - j];
            r.a_[k] = -acc / a_[0];
        }
        return r;
    }

    Series pow(int n) const {
        Series r(order(), 1.0);
        Series base = *this;
        while (n > 0) {
            if (n & 1) r *= base;
            n >>= 1;
            if (n) base *= base;
        }
        return r;
    }

    /// outer(inner(s)) where outer is given by Taylor coefficients around inner's
    /// constant term, i.e. Σ outer_k (inner − inner_0)^k.
    static Series compose(const Series& outer, const Series& inner) {
        Series eps = inner;
        eps.a_[0] = 0.0;
        Series r(inner.order(), 0.0);
        for (int k = outer.order(); k >= 0; --k) {
            r *= eps;
            r.a_[0] += outer.a_[k];
        }
        return r;
    }

    Series& operator+=(const Series& o) {
        for (int k = 0; k <= order() && k <= o.order(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    Series& operator-=(const Series& o) {
        for (int k = 0; k <= order() && k <= o.order(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    Series& operator*=(const Series& o) {
        std::vector<double> r(a_.size(), 0.0);
        const int n = order();
        for (int i = 0; i <= n; ++i) {
            if (a_[i] == 0.0) continue;
            for (int j = 0; i + j <= n && j <= o.order(); ++j) r[i + j] += a_[i] * o.a_[j];
        }
        a_ = std::move(r);
        return *this;
    }
    Series& operator/=(const Series& o) { return *this *= o.reciprocal(); }
    Series& operator+=(double c) { a_[0] += c; return *this; }
    Series& operator-=(double c) { a_[0] -= c; return *this; }
    Series& operator*=(double c) {
        for (auto& x : a_) x *= c;
        return *this;
    }

    friend Series operator+(Series a, const Series& b) { return a += b; }
    friend Series operator-(Series a, const Series& b) { return a -= b; }
    friend Series operator*(Series a, const Series& b) { return a *= b; }
    friend Series operator/(Series a, const Series& b) { return a /= b; }
    friend Series operator+(Series a, double c) { return a += c; }
    friend Series operator-(Series a, double c) { return a -= c; }
    friend Series operator*(Series a, double c) { return a *= c; }
    friend Series operator*(double c, Series a) { return a *= c; }
    friend Series operator-(Series a) { return a *= -1.0; }

private:
    std::vector<double> a_;
};

}  // namespace steklov
