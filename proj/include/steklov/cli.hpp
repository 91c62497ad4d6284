#pragma once

// Command-line driver: forward, asympt, kernel, muntz, invert, probe, stability.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace steklov::cli {

enum Exit : int { ok = 0, validation = 2, numerical = 3, usage = 64 };

struct RunConfig {
    std::string subcommand;
    std::string warping, warping2, spectrum, config, transversal, init;
    std::string output;  ///< empty: standard output
    int dimension = 3;
    std::int64_t count = 0;  ///< 0: subcommand default
    std::optional<double> delta;  ///< overrides the config (stability)
    double tol = 1e-10;
    std::size_t N = 0;       ///< kernel grid cells, 0: automatic
    std::optional<double> alpha;
    double a = 0.5;          ///< probe radius
    double b = 1.0;          ///< Müntz offset
    int n = 10;              ///< Müntz length − 1
    double eps = 0.0;        ///< selector noise level (muntz)
    double noise = 0.0;      ///< uniform noise added to an inversion target
    int degree = 5;
    int p = 3;
    int terms = 2;           ///< expansion order N (asympt)
    std::size_t stride = 10; ///< kernel CSV stride
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

const std::vector<std::string>& subcommands();

/// Throws DomainError on out-of-range overrides.
void validate(const RunConfig& cfg);

/// Runs a validated config; results go to cfg.output or `out`. Returns an Exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (CLI11), applies STEKLOV_LOG and --threads, and runs.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace steklov::cli
