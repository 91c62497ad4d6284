#include "steklov/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "steklov/error.hpp"
#include "steklov/parallel.hpp"

namespace steklov {

std::int64_t SteklovSpectrum::size() const {
    std::int64_t n = 0;
    for (const auto& e : entries) n += e.multiplicity;
    return n;
}

std::vector<double> SteklovSpectrum::expanded(std::int64_t count) const {
    std::vector<double> out;
    for (const auto& e : entries)
        for (std::int64_t i = 0; i < e.multiplicity; ++i) {
            if (count >= 0 && static_cast<std::int64_t>(out.size()) >= count) return out;
            out.push_back(e.sigma);
        }
    return out;
}

std::vector<double> SteklovSpectrum::expanded_kappa(std::int64_t count) const {
    std::vector<double> out;
    for (const auto& e : entries)
        for (std::int64_t i = 0; i < e.multiplicity; ++i) {
            if (count >= 0 && static_cast<std::int64_t>(out.size()) >= count) return out;
            out.push_back(e.kappa);
        }
    return out;
}

double sigma_from_m(int d, double f0, double f0p, double M) {
    return (d - 2) * f0p / (f0 * f0 * f0) - M / (f0 * f0);
}

SteklovSpectrum forward_spectrum(const Warping& w, const TransversalSpectrum& ts, std::int64_t count,
                                 const WeylOptions& opt) {
    if (w.dimension() != ts.dimension())
        throw DomainError(fmt::format("warping dimension {} differs from transversal dimension {}", w.dimension(),
                                      ts.dimension()));
    const auto lad = kappa_ladder(ts, count);
    const ConformalFactor f(w);
    const HalfLineOperator op(HalfLinePotential(w), opt);
    const int d = w.dimension();

    SteklovSpectrum s;
    s.dimension = d;
    s.f0 = f.f0();
    s.f0p = f.f0p();
    s.entries.resize(lad.distinct.size());
    parallel_for(lad.distinct.size(), [&](std::size_t j) {
        const double kappa = lad.distinct[j];
        const WeylData wd = weyl_m(op, kappa);
        // σ = (d−2) f0p/f0³ + (κ − u)/f0², with u = M + κ.
        double sigma = ((d - 2) * s.f0p / s.f0 + kappa - wd.u0) / (s.f0 * s.f0);
        if (j == 0 && std::abs(sigma) < 1e-8) sigma = 0.0;
        s.entries[j] = {sigma, lad.multiplicity[j], kappa};
    });
    return s;
}

double spectrum_sup_distance(const SteklovSpectrum& s, const SteklovSpectrum& t, std::int64_t count) {
    if (s.dimension != t.dimension) throw DomainError("spectra have different dimensions");
    if (s.size() < count || t.size() < count)
        throw DomainError(fmt::format("spectra have {} and {} entries, {} requested", s.size(), t.size(), count));
    const auto a = s.expanded(count), b = t.expanded(count);
    const auto ka = s.expanded_kappa(count), kb = t.expanded_kappa(count);
    double eps = 0.0;
    for (std::int64_t k = 0; k < count; ++k) {
        if (std::abs(ka[k] - kb[k]) > 1e-12 * (1.0 + ka[k]))
            throw DomainError(fmt::format("mismatched transversal ladders at index {}", k));
        eps = std::max(eps, std::abs(a[k] - b[k]));
    }
    return eps;
}

WeylLawFit weyl_law_check(const SteklovSpectrum& s) {
    const auto sig = s.expanded();
    if (sig.size() < 100) throw DomainError("Weyl law check needs at least 100 eigenvalues");
    const double e = 1.0 / (s.dimension - 1);
    const Eigen::Index n = static_cast<Eigen::Index>(sig.size()) - 1;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        X(k - 1, 0) = std::pow(static_cast<double>(k), e);
        X(k - 1, 1) = 1.0;
        y(k - 1) = sig[static_cast<std::size_t>(k)];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    WeylLawFit fit;
    fit.slope = beta(0);
    fit.intercept = beta(1);
    fit.constant = fit.slope * s.f0 * s.f0;
    for (Eigen::Index k = 1; k <= n; ++k)
        fit.residual = std::max(fit.residual, std::abs(y(k - 1) - fit.slope * X(k - 1, 0)));
    return fit;
}

std::string spectrum_csv(const SteklovSpectrum& s) {
    std::string out = fmt::format("# d={} f0={:.17g} f0p={:.17g}\nindex,sigma,multiplicity,kappa\n", s.dimension, s.f0,
                                  s.f0p);
    std::int64_t idx = 0;
    for (const auto& e : s.entries)
        for (std::int64_t i = 0; i < e.multiplicity; ++i)
            out += fmt::format("{},{:.17g},{},{:.17g}\n", idx++, e.sigma, e.multiplicity, e.kappa);
    return out;
}

void write_spectrum_csv(const SteklovSpectrum& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError(fmt::format("cannot write '{}'", path));
    out << spectrum_csv(s);
}

SteklovSpectrum read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError(fmt::format("cannot open spectrum file '{}'", path));
    SteklovSpectrum s;
    bool have_header = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                try {
                    if (key == "d") s.dimension = std::stoi(val);
                    if (key == "f0") s.f0 = std::stod(val);
                    if (key == "f0p") s.f0p = std::stod(val);
                } catch (const std::exception&) {
                    throw DomainError(fmt::format("{}:{}: bad header value '{}'", path, lineno, tok));
                }
            }
            have_header = true;
            continue;
        }
        if (line.rfind("index", 0) == 0) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        long long index;
        SpectrumEntry e;
        if (!(ss >> index >> e.sigma >> e.multiplicity >> e.kappa))
            throw DomainError(fmt::format("{}:{}: expected 'index,sigma,multiplicity,kappa'", path, lineno));
        if (!s.entries.empty() && s.entries.back().kappa == e.kappa && s.entries.back().sigma == e.sigma) continue;
        s.entries.push_back(e);
    }
    if (!have_header) throw DomainError(fmt::format("{}: missing '# d=.. f0=.. f0p=..' header", path));
    if (s.entries.empty()) throw DomainError(fmt::format("{}: no spectrum rows", path));
    return s;
}

}  // namespace steklov
