#include "steklov/weylm.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "steklov/error.hpp"
#include "steklov/ode.hpp"

namespace steklov {
namespace {

constexpr double kCell = 0.25;

ode::Options riccati_options(const WeylOptions& w, double kappa) {
    ode::Options o;
    o.rtol = w.tol;
    o.atol = w.tol * 1e-6;
    o.initial_step = 0.1 / (1.0 + kappa);
    return o;
}

// Backward Riccati sweep for y = (u, I) with u' = q + 2κu − u², I' = u, from
// x1 down to x0.
ode::Result<2> riccati_segment(const HalfLineOperator& op, double kappa, double x1, double x0,
                               std::array<double, 2> y1, const ode::Options& o, double guard) {
    auto rhs = [&](double x, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        dy[0] = op.q(x) + 2.0 * kappa * y[0] - y[0] * y[0];
        dy[1] = y[0];
    };
    auto blown = [&](double, const std::array<double, 2>& y) { return !(std::abs(y[0]) < guard); };
    return ode::integrate<2>(rhs, x1, x0, y1, o, blown);
}

double initial_u(const HalfLineOperator& op, double kappa, double x_max) {
    return op.options().first_order_tail ? -op.q(x_max) / (2.0 * kappa) : 0.0;
}

// Scaled decaying solution Y = (S e^{κx}, S' e^{κx}) integrated backward to x0.
std::array<double, 2> decaying_solution(const HalfLineOperator& op, double kappa, double x0, double x_max) {
    auto rhs = [&](double x, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        dy[0] = kappa * y[0] + y[1];
        dy[1] = kappa * y[1] + (op.q(x) + kappa * kappa) * y[0];
    };
    ode::Options o;
    o.rtol = op.options().tol;
    o.atol = op.options().tol * 1e-6;
    auto res = ode::integrate<2>(rhs, x_max, x0, {1.0, -kappa}, o);
    if (!res.ok) throw NumericalError(fmt::format("decaying solution integration failed at x = {}", res.t_stop));
    return res.y;
}

}  // namespace

HalfLineOperator::HalfLineOperator(std::function<double(double)> q, WeylOptions opt)
    : q_(std::move(q)), opt_(opt) {
    if (!(opt_.tol > 0)) throw DomainError("integration tolerance must be positive");
    const int cells = static_cast<int>(std::ceil(opt_.x_cap / kCell)) + 8;
    samples_.assign(static_cast<std::size_t>(cells), 0.0);
    inf_q_ = 0.0;
    for (int i = 0; i < cells; ++i) {
        double s = 0.0;
        for (int j = 0; j <= 25; ++j) {
            const double v = q_(kCell * (i + j / 25.0));
            s = std::max(s, std::abs(v));
            inf_q_ = std::min(inf_q_, v);
        }
        samples_[static_cast<std::size_t>(i)] = s;
    }
}

HalfLineOperator::HalfLineOperator(const HalfLinePotential& q, WeylOptions opt)
    : HalfLineOperator(q.function(), opt) {}

double HalfLineOperator::inf_q() const { return inf_q_; }

double HalfLineOperator::truncation(double kappa) const {
    if (opt_.x_max > 0) return opt_.x_max;
    const double thr = 1e-14 * (1.0 + kappa * kappa);
    const int span = static_cast<int>(2.0 / kCell);
    const int cells = static_cast<int>(samples_.size());
    for (int i = 0; i + span <= cells; ++i) {
        const double x = kCell * i;
        if (x > opt_.x_cap) break;
        bool small = true;
        for (int j = i; j < i + span && small; ++j) small = samples_[static_cast<std::size_t>(j)] < thr;
        if (small) return x;
    }
    return opt_.x_cap;
}

WeylData weyl_m(const HalfLineOperator& op, double kappa) {
    if (!(kappa > 0)) throw DomainError(fmt::format("kappa must be positive, got {}", kappa));
    WeylData out;
    out.kappa = kappa;
    out.x_max = op.truncation(kappa);
    const double u1 = initial_u(op, kappa, out.x_max);
    const double guard = 1e6 * (1.0 + kappa + std::abs(op.inf_q()));
    auto res = riccati_segment(op, kappa, out.x_max, 0.0, {u1, 0.0}, riccati_options(op.options(), kappa), guard);
    out.steps = res.accepted;
    if (!res.ok) {
        if (!(std::abs(res.y[0]) < guard))
            throw BlowUpError(fmt::format("Riccati solution blew up at x = {:.6g} (kappa = {:.6g})", res.t_stop, kappa),
                              res.t_stop);
        throw NumericalError(fmt::format("Riccati integration failed at x = {:.6g} (kappa = {:.6g})", res.t_stop, kappa));
    }
    out.u0 = res.y[0];
    out.M = -kappa + res.y[0];
    out.S_inf_at_0 = std::exp(res.y[1]);
    out.residual = std::abs(op.q(out.x_max)) / (2.0 * kappa);
    return out;
}

WeylProfile weyl_profile(const HalfLineOperator& op, double kappa, double h, std::size_t points) {
    if (!(kappa > 0)) throw DomainError("kappa must be positive");
    if (points < 1 || !(h > 0)) throw DomainError("profile grid must be non-empty with positive spacing");
    WeylProfile prof;
    prof.kappa = kappa;
    prof.h = h;
    prof.P.assign(points, 1.0);
    prof.u.assign(points, 0.0);
    const double x_end = h * static_cast<double>(points - 1);
    const double x_max = std::max(op.truncation(kappa), x_end);
    const double guard = 1e6 * (1.0 + kappa + std::abs(op.inf_q()));
    auto o = riccati_options(op.options(), kappa);
    std::array<double, 2> y{initial_u(op, kappa, x_max), 0.0};
    double x = x_max;
    for (std::size_t j = points; j-- > 0;) {
        const double xj = h * static_cast<double>(j);
        if (xj < x) {
            auto res = riccati_segment(op, kappa, x, xj, y, o, guard);
            if (!res.ok) {
                if (!(std::abs(res.y[0]) < guard))
                    throw BlowUpError(fmt::format("Riccati solution blew up at x = {:.6g}", res.t_stop), res.t_stop);
                throw NumericalError(fmt::format("Riccati profile integration failed at x = {:.6g}", res.t_stop));
            }
            y = res.y;
            o.initial_step = res.last_step;
            x = xj;
        }
        prof.u[j] = y[0];
        prof.P[j] = std::exp(y[1]);
    }
    return prof;
}

std::array<double, 4> fundamental_solutions(const HalfLineOperator& op, double z, double x) {
    if (!(x >= 0)) throw DomainError("fundamental solutions need x >= 0");
    auto rhs = [&](double t, const std::array<double, 4>& y, std::array<double, 4>& dy) {
        const double v = op.q(t) - z;
        dy[0] = y[1];
        dy[1] = v * y[0];
        dy[2] = y[3];
        dy[3] = v * y[2];
    };
    ode::Options o;
    o.rtol = op.options().tol;
    o.atol = op.options().tol * 1e-6;
    auto res = ode::integrate<4>(rhs, 0.0, x, {1.0, 0.0, 0.0, 1.0}, o);
    if (!res.ok) throw NumericalError(fmt::format("fundamental solution integration failed at x = {}", res.t_stop));
    return res.y;
}

std::pair<double, double> characteristic_functions(const HalfLineOperator& op, double z) {
    if (!(z < 0)) throw DomainError("characteristic functions are evaluated for z < 0");
    const double kappa = std::sqrt(-z);
    const double x_max = op.truncation(kappa);
    const double xm = std::min(1.0, 0.5 * x_max);
    const auto fs = fundamental_solutions(op, z, xm);
    const auto Y = decaying_solution(op, kappa, xm, x_max);
    const double scale = std::exp(-kappa * xm);
    const double S = Y[0] * scale, Sp = Y[1] * scale;
    const double Delta = fs[2] * Sp - fs[3] * S;
    const double dval = fs[0] * Sp - fs[1] * S;
    return {Delta, dval};
}

std::vector<double> dirichlet_eigenvalues(const HalfLineOperator& op, int d) {
    const double lo_z = std::min(op.inf_q(), -0.25 * (d - 2) * (d - 2)) - 0.01;
    const double kmax = std::sqrt(-lo_z);
    const double kmin = 1e-4;
    // S_∞(0, −κ²) up to a positive factor; its zeros are the Dirichlet eigenvalues.
    auto s0 = [&](double kappa) { return decaying_solution(op, kappa, 0.0, op.truncation(kappa))[0]; };
    constexpr int scan = 400;
    std::vector<double> found;
    double k_prev = kmin, v_prev = s0(kmin);
    for (int i = 1; i <= scan; ++i) {
        const double k = kmin + (kmax - kmin) * i / scan;
        const double v = s0(k);
        if (v == 0.0) {
            found.push_back(-k * k);
        } else if ((v > 0) != (v_prev > 0) && v_prev != 0.0) {
            double a = k_prev, b = k, fa = v_prev;
            for (int it = 0; it < 100 && b - a > 1e-13 * b; ++it) {
                const double c = 0.5 * (a + b);
                const double fc = s0(c);
                if ((fc > 0) == (fa > 0)) {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                }
            }
            const double kk = 0.5 * (a + b);
            found.push_back(-kk * kk);
        }
        k_prev = k;
        v_prev = v;
    }
    std::sort(found.begin(), found.end());
    return found;
}

}  // namespace steklov
