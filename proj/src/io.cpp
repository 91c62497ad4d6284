#include "steklov/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "steklov/error.hpp"

namespace steklov::io {
namespace {

// JSON has no infinity; unbounded values are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw DomainError(fmt::format("missing field '{}'", key));
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DomainError(fmt::format("field '{}': {}", key, e.what()));
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

std::map<int, double> int_map(const json& j, const char* what) {
    if (!j.is_object()) throw DomainError(fmt::format("'{}' must be an object of index: value", what));
    std::map<int, double> out;
    for (const auto& [k, v] : j.items()) {
        std::size_t used = 0;
        int idx = 0;
        try {
            idx = std::stoi(k, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != k.size() || !v.is_number()) throw DomainError(fmt::format("bad entry '{}' in '{}'", k, what));
        out[idx] = v.get<double>();
    }
    return out;
}

}  // namespace

json to_json(const Warping& w) {
    json c = json::object();
    for (const auto& [k, v] : w.coefficients()) c[std::to_string(k)] = v;
    json t = json::array();
    for (const auto& tt : w.truncated_terms())
        t.push_back({{"amplitude", tt.amplitude}, {"knot", tt.knot}, {"power", tt.power}});
    return {{"dimension", w.dimension()}, {"p", w.p()},         {"m", w.m()},          {"A", w.A()},
            {"smooth", w.smooth()},       {"coefficients", c}, {"truncated", t}};
}

Warping warping_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("warping must be a JSON object");
    std::vector<TruncatedTerm> trunc;
    if (j.contains("truncated")) {
        for (const auto& t : j.at("truncated"))
            trunc.push_back({field<double>(t, "amplitude"), field<double>(t, "knot"), field<int>(t, "power")});
    }
    const auto coeffs = j.contains("coefficients") ? int_map(j.at("coefficients"), "coefficients") : std::map<int, double>{};
    return Warping(field<int>(j, "dimension"), field_or<int>(j, "p", 3), field_or<int>(j, "m", 4),
                   field_or<double>(j, "A", 10.0), field_or<bool>(j, "smooth", false), coeffs, trunc);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError(fmt::format("cannot open '{}'", path));
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError(fmt::format("{}: {}", path, e.what()));
    }
}

Warping read_warping(const std::string& path) { return warping_from_json(read_json(path)); }

json to_json(const std::map<std::string, FittedConstant>& c) {
    json out = json::object();
    for (const auto& [k, v] : c) out[k] = {{"value", number(v.value)}, {"provenance", v.provenance}};
    return out;
}

json to_json(const StabilityReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"s", row.s},
                        {"calibration", row.calibration},
                        {"skipped", row.skipped},
                        {"eps", row.eps},
                        {"potential_gap", {{"true", row.potential_true},
                                           {"estimate", row.potential_estimate},
                                           {"certified", number(row.potential_certified)}}},
                        {"warping_gap", {{"true", row.warping_true},
                                         {"bound", number(row.warping_bound)},
                                         {"chain_bound", number(row.warping_chain_bound)}}},
                        {"n", row.n},
                        {"h_derivative_sup", row.h_derivative_sup}});
    }
    return {{"dimension", r.dimension},
            {"p", r.p},
            {"exponent", r.exponent},
            {"theta", r.theta},
            {"singular", r.singular},
            {"sound", r.sound},
            {"eps_monotone", r.eps_monotone},
            {"eps_decades", r.eps_decades},
            {"fitted_loglog_slope", r.fitted_loglog_slope},
            {"constants", to_json(r.constants)},
            {"rows", rows}};
}

json to_json(const Reconstruction& r) {
    return {{"warping", to_json(r.warping)}, {"iterations", r.iterations}, {"converged", r.converged},
            {"stop_reason", r.stop_reason},  {"misfit", r.misfit},         {"gradient", r.gradient}};
}

json to_json(const ProbeResult& r) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.kappa.size(); ++i)
        rows.push_back({{"kappa", r.kappa[i]}, {"difference", r.difference[i]}, {"floor", r.floor[i]}});
    return {{"slope", number(r.slope)}, {"threshold", r.threshold}, {"used", r.used},      {"at_floor", r.at_floor},
            {"agrees", r.agrees},       {"verdict", r.verdict},     {"rows", rows}};
}

StabilityConfig stability_config_from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw DomainError("stability config must be a JSON object");
    StabilityConfig cfg;
    cfg.base = warping_from_json(field<json>(j, "base"));
    cfg.profile = int_map(field<json>(j, "profile"), "profile");
    cfg.calibration_s = field<std::vector<double>>(j, "calibration_s");
    cfg.test_s = field<std::vector<double>>(j, "test_s");
    cfg.count = field_or<std::size_t>(j, "count", cfg.count);
    cfg.delta = field_or<double>(j, "delta", cfg.delta);
    cfg.alpha = field_or<double>(j, "alpha", cfg.alpha);
    if (j.contains("transversal")) {
        std::filesystem::path p = field<std::string>(j, "transversal");
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        cfg.transversal = TransversalSpectrum::from_csv(cfg.base.dimension(), p.string());
    }
    return cfg;
}

StabilityConfig read_stability_config(const std::string& path) {
    return stability_config_from_json(read_json(path), std::filesystem::path(path).parent_path().string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DomainError(fmt::format("cannot write '{}'", path));
    out << text;
}

}  // namespace steklov::io
