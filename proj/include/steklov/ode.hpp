#pragma once

// Dormand–Prince 5(4) embedded Runge–Kutta with PI step-size control, for
// small fixed-size systems. Integrates in either direction of t.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

namespace steklov::ode {

struct Options {
    double rtol = 1e-10;
    double atol = 1e-14;
    double initial_step = 0.0;  ///< 0 picks a step from the interval length
    double max_step = 0.0;      ///< 0 means unbounded
    long max_steps = 2'000'000;
};

template <std::size_t N>
struct Result {
    std::array<double, N> y{};
    long accepted = 0;
    long rejected = 0;
    bool ok = true;
    double t_stop = 0.0;  ///< where integration ended (t1 unless aborted)
    double last_step = 0.0;
};

/// rhs(t, y, dydt). `abort_if(t, y)` is checked after every accepted step; a
/// true return ends integration with ok = false.
template <std::size_t N, class Rhs, class Abort>
Result<N> integrate(Rhs&& rhs, double t0, double t1, std::array<double, N> y0, const Options& opt,
                    Abort&& abort_if) {
    using State = std::array<double, N>;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    Result<N> res;
    res.y = y0;
    res.t_stop = t0;
    if (t1 == t0) return res;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double h = opt.initial_step > 0 ? opt.initial_step : std::min(span, 1e-2);
    if (opt.max_step > 0) h = std::min(h, opt.max_step);

    State k1, k2, k3, k4, k5, k6, k7, tmp, y = y0, ynew;
    double t = t0;
    rhs(t, y, k1);
    double err_prev = 1e-4;
    bool last_rejected = false;

    while (dir * (t1 - t) > 0) {
        if (res.accepted + res.rejected >= opt.max_steps) {
            res.ok = false;
            break;
        }
        if (std::abs(t1 - t) <= 1e-14 * std::max(1.0, std::abs(t))) {
            t = t1;  // remainder below rounding of t
            break;
        }
        if (dir * (t + dir * h - t1) > 0) h = std::abs(t1 - t);
        const double hs = dir * h;

        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
        rhs(t + c2 * hs, tmp, k2);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * hs, tmp, k3);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * hs, tmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * hs, tmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + hs, tmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + hs, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(ei) / sc);
        }
        if (!std::isfinite(err)) err = 1e10;

        if (err <= 1.0) {
            t += hs;
            y = ynew;
            k1 = k7;
            ++res.accepted;
            res.last_step = h;
            if (abort_if(t, y)) {
                res.ok = false;
                break;
            }
            double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
            fac = std::clamp(fac, 0.2, 5.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h *= fac;
            err_prev = std::max(err, 1e-4);
            last_rejected = false;
        } else {
            ++res.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            last_rejected = true;
        }
        if (opt.max_step > 0) h = std::min(h, opt.max_step);
        if (dir * (t1 - t) > 0 && h < 1e-14 * std::max(1.0, std::abs(t))) {
            res.ok = false;
            break;
        }
    }
    res.y = y;
    res.t_stop = t;
    return res;
}

template <std::size_t N, class Rhs>
Result<N> integrate(Rhs&& rhs, double t0, double t1, std::array<double, N> y0, const Options& opt = {}) {
    return integrate<N>(std::forward<Rhs>(rhs), t0, t1, y0, opt, [](double, const std::array<double, N>&) {
        return false;
    });
}

}  // namespace steklov::ode
