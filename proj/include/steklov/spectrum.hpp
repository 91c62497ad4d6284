#pragma once

// Steklov spectrum of a warped ball: σ = (d−2) f'(0)/f(0)³ − M(−κ²)/f(0)²,
// one value per distinct transversal frequency κ.

#include <cstdint>
#include <string>
#include <vector>

#include "steklov/transversal.hpp"
#include "steklov/warp.hpp"
#include "steklov/weylm.hpp"

namespace steklov {

struct SpectrumEntry {
    double sigma = 0.0;
    std::int64_t multiplicity = 1;
    double kappa = 0.0;
};

struct SteklovSpectrum {
    int dimension = 3;
    double f0 = 1.0;
    double f0p = -0.5;
    std::vector<SpectrumEntry> entries;  ///< compressed, in increasing κ

    std::int64_t size() const;
    /// σ_0, σ_1, … with multiplicities expanded (first `count`, or all).
    std::vector<double> expanded(std::int64_t count = -1) const;
    std::vector<double> expanded_kappa(std::int64_t count = -1) const;
};

SteklovSpectrum forward_spectrum(const Warping& w, const TransversalSpectrum& ts, std::int64_t count,
                                 const WeylOptions& opt = {});

/// The same map applied to precomputed M values (one per distinct κ).
double sigma_from_m(int d, double f0, double f0p, double M);

/// sup over the first `count` expanded entries of |σ_k − σ̃_k|.
double spectrum_sup_distance(const SteklovSpectrum& s, const SteklovSpectrum& t, std::int64_t count);

struct WeylLawFit {
    double slope = 0.0;      ///< fitted coefficient of k^{1/(d−1)}
    double intercept = 0.0;
    double constant = 0.0;   ///< slope · f(0)², estimate of c_{d−1}
    double residual = 0.0;   ///< sup_k |σ_k − slope k^{1/(d−1)}|
};
WeylLawFit weyl_law_check(const SteklovSpectrum& s);

/// CSV: `# d=.. f0=.. f0p=..` then `index,sigma,multiplicity,kappa` rows,
/// multiplicity expanded (repeated rows carry the same multiplicity).
void write_spectrum_csv(const SteklovSpectrum& s, const std::string& path);
SteklovSpectrum read_spectrum_csv(const std::string& path);
std::string spectrum_csv(const SteklovSpectrum& s);

}  // namespace steklov
