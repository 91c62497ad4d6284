#pragma once

// JSON encodings of warpings, configurations and reports.

#include <string>

#include "json.hpp"

#include "steklov/inverse.hpp"

namespace steklov::io {

using json = nlohmann::json;

/// {"dimension", "p", "m", "A", "smooth", "coefficients": {"k": a_k}, "truncated": [...]}
json to_json(const Warping& w);
Warping warping_from_json(const json& j);
Warping read_warping(const std::string& path);

json to_json(const StabilityReport& r);
json to_json(const Reconstruction& r);
json to_json(const ProbeResult& r);
json to_json(const std::map<std::string, FittedConstant>& c);

/// Stability family: {"base": warping, "profile": {"k": v}, "calibration_s": [...],
/// "test_s": [...], "count", "delta", optional "transversal" (CSV path, relative to
/// the config file) and "alpha"}.
StabilityConfig stability_config_from_json(const json& j, const std::string& base_dir = ".");
StabilityConfig read_stability_config(const std::string& path);

json read_json(const std::string& path);
/// Two-space indentation and a trailing newline.
std::string dump(const json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace steklov::io
