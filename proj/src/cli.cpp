#include "steklov/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <random>

#include "CLI11.hpp"
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "steklov/asympt.hpp"
#include "steklov/error.hpp"
#include "steklov/io.hpp"
#include "steklov/parallel.hpp"
#include "steklov/quadrature.hpp"

namespace steklov::cli {
namespace {

using io::json;

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.output.empty())
        out << text;
    else
        io::write_text(cfg.output, text);
}

Warping load_warping(const std::string& path, int d) {
    return path.empty() ? Warping::unit(d) : io::read_warping(path);
}

TransversalSpectrum load_transversal(const RunConfig& cfg, int d) {
    return cfg.transversal.empty() ? TransversalSpectrum::round(d) : TransversalSpectrum::from_csv(d, cfg.transversal);
}

void cmd_forward(const RunConfig& cfg, std::ostream& out) {
    const auto w = load_warping(cfg.warping, cfg.dimension);
    const auto ts = load_transversal(cfg, w.dimension());
    const auto s = forward_spectrum(w, ts, cfg.count ? cfg.count : 100, WeylOptions{cfg.tol});
    emit(cfg, out, spectrum_csv(s));
}

void cmd_asympt(const RunConfig& cfg, std::ostream& out) {
    const auto w = load_warping(cfg.warping, cfg.dimension);
    const int d = w.dimension();
    const auto ts = load_transversal(cfg, d);
    const auto s = forward_spectrum(w, ts, cfg.count ? cfg.count : 400, WeylOptions{cfg.tol});
    const HalfLinePotential q(w);
    const auto jet = potential_jet_at_zero(q, cfg.terms);
    const auto beta = beta_recursion(jet, cfg.terms);
    json rows = json::array();
    for (const auto& e : s.entries) {
        json exp = json::array();
        for (int N = 0; N <= cfg.terms; ++N) exp.push_back(expansion_sigma(beta, s.f0, s.f0p, d, e.kappa, N));
        rows.push_back({{"kappa", e.kappa}, {"sigma", e.sigma}, {"multiplicity", e.multiplicity}, {"expansion", exp}});
    }
    json rep = {{"dimension", d}, {"f0", s.f0}, {"f0p", s.f0p}, {"jet", jet}, {"beta", beta.beta}, {"rows", rows}};
    try {
        const auto be = boundary_data_from_spectrum(s);
        rep["boundary_estimate"] = {{"f0", be.f0},       {"f0p", be.f0p},       {"q0", be.q0},
                                    {"se_f0", be.se_f0}, {"se_f0p", be.se_f0p}, {"se_q0", be.se_q0},
                                    {"used", be.used}};
    } catch (const DomainError& e) {
        rep["boundary_estimate"] = nullptr;
        spdlog::info("boundary estimate skipped: {}", e.what());
    }
    emit(cfg, out, io::dump(rep));
}

void cmd_kernel(const RunConfig& cfg, std::ostream& out) {
    const auto w = load_warping(cfg.warping, cfg.dimension);
    const HalfLineOperator op(HalfLinePotential(w), WeylOptions{std::min(cfg.tol, 1e-10)});
    KernelOptions ko;
    ko.N = cfg.N;
    const auto K = solve_kernel(op, ko);
    double diag = 0.0;
    for (double x = 0.0; x <= std::min(5.0, K.U()); x += 0.25) {
        const double tail = 0.5 * quad::adaptive_tail([&](double s) { return op.q(s); }, x);
        diag = std::max(diag, std::abs(K.K(x, x) - tail));
    }
    json checks = json::array();
    for (double kappa : {3.0, 6.0, 12.0})
        checks.push_back({{"kappa", kappa},
                          {"kernel", kernel_weyl_solution_at_0(K, kappa)},
                          {"weyl", weyl_m(op, kappa).S_inf_at_0}});
    json rep = {{"h", K.h()},         {"N", K.N()},           {"U", K.U()},
                {"sweeps", K.sweeps()}, {"last_change", K.last_change()}, {"diagonal_max_error", diag},
                {"S_inf_at_0", checks}};
    if (!cfg.output.empty()) {
        write_kernel_csv(K, cfg.output, cfg.stride);
        rep["csv"] = cfg.output;
    }
    out << io::dump(rep);
}

void cmd_muntz(const RunConfig& cfg, std::ostream& out) {
    const auto seq = MuntzSequence::arithmetic(cfg.b, 1, cfg.n);
    const auto basis = gram_coefficients(seq);
    const auto bi = blaschke_index(seq);
    json rep = {{"b", cfg.b},
                {"n", cfg.n},
                {"exponents", seq.exponents()},
                {"separated", seq.separated()},
                {"blaschke_index", bi.value},
                {"argmax", bi.argmax},
                {"closed_form", bi.closed_form ? json(*bi.closed_form) : json(nullptr)},
                {"orthonormality_error", basis.orthonormality_error()},
                {"overflow", basis.overflow()}};
    if (cfg.eps > 0.0) {
        const auto tc = truncation_selector(cfg.eps, cfg.b);
        rep["selector"] = {{"eps", cfg.eps}, {"n", tc.n}, {"uncapped", tc.uncapped}, {"capped", tc.capped}, {"g_n", tc.g_n}};
    }
    emit(cfg, out, io::dump(rep));
}

void cmd_invert(const RunConfig& cfg, std::ostream& out) {
    if (cfg.spectrum.empty()) throw DomainError("invert needs --spectrum");
    auto target = read_spectrum_csv(cfg.spectrum);
    const int d = target.dimension;
    if (cfg.noise > 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-cfg.noise, cfg.noise);
        for (auto& e : target.entries) e.sigma += u(rng);
    }
    const Warping init = cfg.init.empty() ? Warping::unit(d, cfg.p) : io::read_warping(cfg.init);
    const auto ts = load_transversal(cfg, d);
    ReconstructOptions ro;
    ro.weyl = WeylOptions{std::min(cfg.tol, 1e-11)};
    const auto rec = reconstruct_warping(target, ts, cfg.degree, init, ro);
    emit(cfg, out, io::dump(io::to_json(rec)));
}

void cmd_probe(const RunConfig& cfg, std::ostream& out) {
    if (cfg.warping.empty() || cfg.warping2.empty()) throw DomainError("probe needs --warping and --warping2");
    const auto w = io::read_warping(cfg.warping), wt = io::read_warping(cfg.warping2);
    const auto pr = local_uniqueness_probe(w, wt, cfg.a, static_cast<std::size_t>(cfg.count ? cfg.count : 40), 0.1,
                                           WeylOptions{std::min(cfg.tol, 1e-12)});
    emit(cfg, out, io::dump(io::to_json(pr)));
}

void cmd_stability(const RunConfig& cfg, std::ostream& out) {
    if (cfg.config.empty()) throw DomainError("stability needs --config");
    auto sc = io::read_stability_config(cfg.config);
    if (cfg.alpha) sc.alpha = *cfg.alpha;
    if (cfg.delta) sc.delta = *cfg.delta;
    if (cfg.count) sc.count = static_cast<std::size_t>(cfg.count);
    const auto rep = stability_experiment(sc);
    emit(cfg, out, io::dump(io::to_json(rep)));
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"forward", "asympt", "kernel", "muntz", "invert", "probe", "stability"};
    return names;
}

void validate(const RunConfig& cfg) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), cfg.subcommand) == names.end())
        throw DomainError(fmt::format("unknown subcommand '{}'", cfg.subcommand));
    if (cfg.delta && !(*cfg.delta > 0.0 && *cfg.delta < 1.0)) throw DomainError("--delta must lie in (0,1)");
    if (cfg.alpha && !(*cfg.alpha > 0.5 && *cfg.alpha < 1.5)) throw DomainError("--alpha must lie in (1/2, 3/2)");
    if (!(cfg.tol >= 1e-14 && cfg.tol <= 1e-4)) throw DomainError("--tol must lie in [1e-14, 1e-4]");
    if (cfg.count < 0) throw DomainError("--count must be positive");
    if (cfg.N != 0 && cfg.N < 8) throw DomainError("--N must be at least 8");
    if (cfg.dimension < 3) throw DomainError("--dimension must be >= 3");
    if (!(cfg.a > 0.0)) throw DomainError("--a must be positive");
    if (!(cfg.b >= 0.0)) throw DomainError("--b must be nonnegative");
    if (cfg.n < 1 || cfg.n > 60) throw DomainError("--n must lie in [1, 60]");
    if (!(cfg.eps >= 0.0 && cfg.eps < 1.0)) throw DomainError("--eps must lie in [0, 1)");
    if (!(cfg.noise >= 0.0)) throw DomainError("--noise must be nonnegative");
    if (cfg.terms < 0) throw DomainError("--terms must be nonnegative");
    if (cfg.stride == 0) throw DomainError("--stride must be positive");
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        validate(cfg);
        const std::string& c = cfg.subcommand;
        if (c == "forward") cmd_forward(cfg, out);
        else if (c == "asympt") cmd_asympt(cfg, out);
        else if (c == "kernel") cmd_kernel(cfg, out);
        else if (c == "muntz") cmd_muntz(cfg, out);
        else if (c == "invert") cmd_invert(cfg, out);
        else if (c == "probe") cmd_probe(cfg, out);
        else cmd_stability(cfg, out);
        return Exit::ok;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return Exit::validation;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return Exit::numerical;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    if (const char* lvl = std::getenv("STEKLOV_LOG")) {
        const std::string v = lvl;
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "info") spdlog::set_level(spdlog::level::info);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else {
            err << "error: STEKLOV_LOG must be one of error, info, debug\n";
            return Exit::validation;
        }
    } else {
        spdlog::set_level(spdlog::level::warn);
    }

    const auto& names = subcommands();
    if (argc > 1 && argv[1][0] != '-' && std::find(names.begin(), names.end(), argv[1]) == names.end()) {
        err << "error: unknown subcommand '" << argv[1] << "'\n";
        return Exit::usage;
    }

    RunConfig cfg;
    CLI::App app{"Steklov spectra of warped balls: forward map, asymptotics, kernels, Müntz diagnostics and inversion"};
    app.set_help_all_flag("--help-all", "Print help for every subcommand");
    app.require_subcommand(1);
    app.add_option("--threads", cfg.threads, "Worker thread cap (0 = all cores)");

    auto common = [&](CLI::App* s) {
        s->add_option("--out", cfg.output, "Output file (default: standard output)");
        s->add_option("--tol", cfg.tol, "Integrator tolerance, in [1e-14, 1e-4]");
    };
    auto warping = [&](CLI::App* s) {
        s->add_option("--warping", cfg.warping, "Warping JSON (default: c = 1)");
        s->add_option("--dimension", cfg.dimension, "Dimension d when no warping file is given");
        s->add_option("--transversal", cfg.transversal, "Transversal spectrum CSV 'mu,multiplicity' (default: round sphere)");
    };

    auto* fwd = app.add_subcommand("forward", "Warping to Steklov spectrum CSV (index,sigma,multiplicity,kappa)");
    common(fwd);
    warping(fwd);
    fwd->add_option("--count", cfg.count, "Number of eigenvalues with multiplicity (default 100)");

    auto* asy = app.add_subcommand("asympt", "High-frequency expansion report (JSON)");
    common(asy);
    warping(asy);
    asy->add_option("--count", cfg.count, "Number of eigenvalues with multiplicity (default 400)");
    asy->add_option("--terms", cfg.terms, "Expansion order N (needs N <= m - 2)");

    auto* ker = app.add_subcommand("kernel", "Transformation kernel diagnostics (JSON); --out writes the kernel CSV x,t,K");
    common(ker);
    ker->add_option("--warping", cfg.warping, "Warping JSON (default: c = 1)");
    ker->add_option("--dimension", cfg.dimension, "Dimension d when no warping file is given");
    ker->add_option("--N", cfg.N, "Grid cells (0 = automatic)");
    ker->add_option("--stride", cfg.stride, "CSV stride in grid points");

    auto* mz = app.add_subcommand("muntz", "Müntz basis and Blaschke diagnostics for λ_k = 2k + b, k = 1..n (JSON)");
    common(mz);
    mz->add_option("--b", cfg.b, "Offset b");
    mz->add_option("--n", cfg.n, "Largest index n");
    mz->add_option("--eps", cfg.eps, "Noise level for the truncation selector");

    auto* inv = app.add_subcommand("invert", "Spectrum CSV to warping JSON by weighted least squares");
    common(inv);
    inv->add_option("--spectrum", cfg.spectrum, "Target spectrum CSV")->required();
    inv->add_option("--init", cfg.init, "Initial warping JSON (default: c = 1)");
    inv->add_option("--transversal", cfg.transversal, "Transversal spectrum CSV (default: round sphere)");
    inv->add_option("--degree", cfg.degree, "Highest coefficient index (<= 8)");
    inv->add_option("--p", cfg.p, "Flatness order of the default initial warping");
    inv->add_option("--noise", cfg.noise, "Uniform noise amplitude added to the target");
    inv->add_option("--seed", cfg.seed, "Seed for --noise");

    auto* prb = app.add_subcommand("probe", "Local-uniqueness decay of thinned spectral differences (JSON)");
    common(prb);
    prb->add_option("--warping", cfg.warping, "First warping JSON")->required();
    prb->add_option("--warping2", cfg.warping2, "Second warping JSON")->required();
    prb->add_option("--a", cfg.a, "Radius parameter a (pairs agreeing on [e^-a, 1])");
    prb->add_option("--count", cfg.count, "Number of thinned entries (default 40)");

    auto* stab = app.add_subcommand("stability", "Stability sweep over a warping family (report JSON)");
    common(stab);
    stab->add_option("--config", cfg.config, "Family config JSON")->required();
    stab->add_option("--count", cfg.count, "Distinct frequencies used (overrides the config)");
    stab->add_option("--delta", cfg.delta, "Weight exponent of H_delta, in (0,1)");
    stab->add_option("--alpha", cfg.alpha, "Singular-mode shift, in (1/2, 3/2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Exit::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Exit::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return Exit::validation;
    }
    for (auto* s : app.get_subcommands()) cfg.subcommand = s->get_name();
    max_threads().store(cfg.threads);
    return run(cfg, out, err);
}

}  // namespace steklov::cli
