#include "steklov/transversal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "steklov/error.hpp"

namespace steklov {
namespace {

using i128 = __int128;

std::int64_t checked_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    i128 r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;  // exact: r is C(n-k+i, i)
        if (r > std::numeric_limits<std::int64_t>::max())
            throw NumericalError(fmt::format("binomial({}, {}) overflows 64-bit integers", n, k));
    }
    return static_cast<std::int64_t>(r);
}

// Thinned sequence ν_k = κ at expanded index k^{d−1}, k = 1..K.
std::vector<double> thinned(const FrequencyLadder& lad, int d, std::int64_t* kmax) {
    std::vector<double> nu;
    for (std::int64_t k = 1;; ++k) {
        const auto idx = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(k), d - 1)));
        if (idx >= static_cast<std::int64_t>(lad.kappa.size())) break;
        nu.push_back(lad.kappa[static_cast<std::size_t>(idx)]);
    }
    if (kmax) *kmax = static_cast<std::int64_t>(nu.size());
    return nu;
}

}  // namespace

Eigenpair round_sphere_mu(int d, int l) {
    if (d < 3) throw DomainError(fmt::format("dimension must be >= 3, got {}", d));
    if (l < 0) throw DomainError(fmt::format("degree must be >= 0, got {}", l));
    const std::int64_t b = checked_binomial(l + d - 3, l);
    const i128 num = static_cast<i128>(2 * l + d - 2) * b;
    if (num % (d - 2) != 0) throw NumericalError("multiplicity is not an integer");
    const i128 mult = num / (d - 2);
    if (mult > std::numeric_limits<std::int64_t>::max())
        throw NumericalError(fmt::format("multiplicity at degree {} overflows 64-bit integers", l));
    return {static_cast<double>(l) * (l + d - 2), static_cast<std::int64_t>(mult)};
}

double kappa_of(double mu, int d) { return std::sqrt(mu + 0.25 * (d - 2) * (d - 2)); }

TransversalSpectrum TransversalSpectrum::round(int d) {
    if (d < 3) throw DomainError(fmt::format("dimension must be >= 3, got {}", d));
    TransversalSpectrum t;
    t.d_ = d;
    t.round_ = true;
    return t;
}

TransversalSpectrum TransversalSpectrum::custom(int d, std::vector<Eigenpair> entries) {
    if (d < 3) throw DomainError(fmt::format("dimension must be >= 3, got {}", d));
    if (entries.empty()) throw DomainError("custom spectrum is empty");
    if (entries[0].mu != 0.0 || entries[0].multiplicity != 1)
        throw DomainError("custom spectrum must start with mu = 0 of multiplicity 1");
    for (std::size_t j = 0; j < entries.size(); ++j) {
        if (entries[j].multiplicity < 1) throw DomainError(fmt::format("row {}: multiplicity must be >= 1", j));
        if (!std::isfinite(entries[j].mu)) throw DomainError(fmt::format("row {}: mu is not finite", j));
        if (j > 0 && !(entries[j].mu > entries[j - 1].mu))
            throw DomainError(fmt::format("row {}: mu values must be strictly increasing", j));
    }
    TransversalSpectrum t;
    t.d_ = d;
    t.round_ = false;
    t.entries_ = std::move(entries);
    return t;
}

TransversalSpectrum TransversalSpectrum::from_csv(int d, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError(fmt::format("cannot open transversal spectrum file '{}'", path));
    std::vector<Eigenpair> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        Eigenpair e;
        if (!(ss >> e.mu >> e.multiplicity)) {
            if (rows.empty() && lineno == 1) continue;  // header
            throw DomainError(fmt::format("{}:{}: expected 'mu,multiplicity'", path, lineno));
        }
        rows.push_back(e);
    }
    return custom(d, std::move(rows));
}

Eigenpair TransversalSpectrum::distinct(std::size_t j) const {
    if (round_) return round_sphere_mu(d_, static_cast<int>(j));
    if (j >= entries_.size())
        throw DomainError(fmt::format("custom spectrum exhausted: {} distinct values available", entries_.size()));
    return entries_[j];
}

std::optional<std::size_t> TransversalSpectrum::distinct_count() const {
    if (round_) return std::nullopt;
    return entries_.size();
}

std::optional<std::int64_t> TransversalSpectrum::total_count() const {
    if (round_) return std::nullopt;
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e.multiplicity;
    return n;
}

bool TransversalSpectrum::operator==(const TransversalSpectrum& o) const {
    if (d_ != o.d_ || round_ != o.round_) return false;
    if (round_) return true;
    if (entries_.size() != o.entries_.size()) return false;
    for (std::size_t j = 0; j < entries_.size(); ++j)
        if (entries_[j].mu != o.entries_[j].mu || entries_[j].multiplicity != o.entries_[j].multiplicity)
            return false;
    return true;
}

FrequencyLadder kappa_ladder(const TransversalSpectrum& ts, std::int64_t count) {
    if (count < 1) throw DomainError("ladder count must be >= 1");
    if (auto total = ts.total_count(); total && *total < count)
        throw DomainError(fmt::format("custom spectrum has {} entries, {} requested", *total, count));
    FrequencyLadder lad;
    lad.dimension = ts.dimension();
    const int d = ts.dimension();
    const double floor_kappa = 0.5 * (d - 2);
    lad.kappa.reserve(static_cast<std::size_t>(count));
    for (std::size_t j = 0; static_cast<std::int64_t>(lad.kappa.size()) < count; ++j) {
        const Eigenpair e = ts.distinct(j);
        const double k = kappa_of(e.mu, d);
        if (k < floor_kappa) throw NumericalError("kappa below (d-2)/2");
        const std::int64_t take = std::min<std::int64_t>(e.multiplicity, count - static_cast<std::int64_t>(lad.kappa.size()));
        lad.distinct.push_back(k);
        lad.multiplicity.push_back(take);
        for (std::int64_t i = 0; i < take; ++i) {
            lad.kappa.push_back(k);
            lad.distinct_index.push_back(lad.distinct.size() - 1);
        }
    }
    return lad;
}

WeylFit weyl_constant(const TransversalSpectrum& ts) {
    const int d = ts.dimension();
    const int n = d - 1;
    WeylFit fit;
    if (ts.is_round()) {
        const double omega = std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
        const double vol = 2.0 * std::pow(std::numbers::pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
        fit.constant = 2.0 * std::numbers::pi * std::pow(omega * vol, -1.0 / n);
        const double kmax = std::min(60.0, std::floor(std::pow(2e6, 1.0 / n)));
        const std::int64_t count = static_cast<std::int64_t>(std::pow(kmax, n)) + 1;
        const auto nu = thinned(kappa_ladder(ts, count), d, nullptr);
        for (std::size_t k = 0; k < nu.size(); ++k)
            fit.residual = std::max(fit.residual, std::abs(nu[k] - fit.constant * static_cast<double>(k + 1)));
        return fit;
    }
    const std::int64_t total = *ts.total_count();
    if (total < 50) throw DomainError(fmt::format("custom spectrum needs >= 50 entries, has {}", total));
    const auto lad = kappa_ladder(ts, total);
    const auto nu = thinned(lad, d, nullptr);
    if (nu.size() < 5) throw DomainError("custom spectrum too short for a Weyl fit");

    // Growth exponent on the expanded ladder must be 1/(d−1).
    {
        const std::size_t lo = lad.kappa.size() / 4;
        Eigen::MatrixXd X(lad.kappa.size() - lo, 2);
        Eigen::VectorXd y(lad.kappa.size() - lo);
        for (std::size_t i = lo; i < lad.kappa.size(); ++i) {
            X(i - lo, 0) = std::log(static_cast<double>(i + 1));
            X(i - lo, 1) = 1.0;
            y(i - lo) = std::log(lad.kappa[i]);
        }
        const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
        const double expected = 1.0 / n;
        if (std::abs(beta(0) - expected) > 0.25 * expected)
            throw NumericalError(fmt::format("sequence does not follow a Weyl law: growth exponent {:.4g}, expected {:.4g}",
                                             beta(0), expected));
    }
    Eigen::MatrixXd X(nu.size(), 2);
    Eigen::VectorXd y(nu.size());
    for (std::size_t k = 0; k < nu.size(); ++k) {
        X(k, 0) = static_cast<double>(k + 1);
        X(k, 1) = 1.0;
        y(k) = nu[k];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    fit.constant = beta(0);
    if (!(fit.constant > 0)) throw NumericalError("non-positive Weyl constant");
    for (std::size_t k = 0; k < nu.size(); ++k)
        fit.residual = std::max(fit.residual, std::abs(nu[k] - fit.constant * static_cast<double>(k + 1)));
    return fit;
}

}  // namespace steklov
