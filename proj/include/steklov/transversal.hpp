#pragma once

// Transversal eigenvalues μ of the boundary sphere (round or user supplied)
// and the shifted frequencies κ = sqrt(μ + (d−2)²/4).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace steklov {

struct Eigenpair {
    double mu = 0.0;
    std::int64_t multiplicity = 1;
};

/// μ = l(l+d−2) with the spherical-harmonic multiplicity (exact integers).
Eigenpair round_sphere_mu(int d, int l);

struct WeylFit {
    double constant = 0.0;  ///< c_{d−1}
    double residual = 0.0;  ///< sup_k |κ_k − c k^{1/(d−1)}|
};

class TransversalSpectrum {
public:
    static TransversalSpectrum round(int d);
    /// μ strictly increasing, starting with (0, 1).
    static TransversalSpectrum custom(int d, std::vector<Eigenpair> entries);
    static TransversalSpectrum from_csv(int d, const std::string& path);

    int dimension() const noexcept { return d_; }
    bool is_round() const noexcept { return round_; }

    /// Distinct eigenvalue number j (0-based); throws when a custom list is exhausted.
    Eigenpair distinct(std::size_t j) const;
    /// Number of stored distinct values (unbounded for the round sphere).
    std::optional<std::size_t> distinct_count() const;
    /// Number of multiplicity-expanded entries (unbounded for the round sphere).
    std::optional<std::int64_t> total_count() const;

    bool operator==(const TransversalSpectrum& o) const;

private:
    int d_ = 3;
    bool round_ = true;
    std::vector<Eigenpair> entries_;
};

struct FrequencyLadder {
    int dimension = 3;
    std::vector<double> kappa;                  ///< expanded, nondecreasing
    std::vector<double> distinct;               ///< strictly increasing
    std::vector<std::int64_t> multiplicity;     ///< per distinct value
    std::vector<std::size_t> distinct_index;    ///< expanded entry -> distinct index
};

double kappa_of(double mu, int d);

/// First `count` expanded κ values. The last distinct value may be cut short.
FrequencyLadder kappa_ladder(const TransversalSpectrum& ts, std::int64_t count);

/// Round sphere: closed form 2π(ω_{d−1} Vol(S^{d−1}))^{-1/(d−1)}. Custom: least
/// squares on the thinned sequence ν_k = κ_{k^{d−1}} ≈ c k + b (needs ≥ 50
/// entries). In both cases residual = sup_{k≥1} |ν_k − c k|.
WeylFit weyl_constant(const TransversalSpectrum& ts);

}  // namespace steklov
