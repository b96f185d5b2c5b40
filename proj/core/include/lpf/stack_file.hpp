#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "lpf/gradient.hpp"
#include "lpf/optimizer.hpp"

namespace lpf {

inline constexpr int kStackFileVersion = 1;

/// Versioned JSON form of a filter stack:
///
///   {"version": 1, "units": "raw", "variant": "cubic20",
///    "cubic": {"r": [...], "g": [...], "b": [...]},
///    "graduated": [{"scale": [r, g, b], "slope": m, "intercept": c,
///                   "offset_top": o1, "offset_bottom": o2, "inv": g}],
///    "elliptical": [{"scale": [r, g, b], "center_x": h, "center_y": k,
///                    "angle": theta, "semi_major": a, "semi_minor": b}]}
///
/// With "units": "raw" the lengths (offsets, semi-axes) are the
/// unconstrained pre-softplus values; with "natural" they are the positive
/// lengths themselves. Writers always emit raw units.
nlohmann::json stack_to_json(const ParamVector& params);

/// Throws Error{format} on unknown versions, wrong coefficient counts or
/// malformed fields.
ParamVector stack_from_json(const nlohmann::json& doc);

void save_stack_file(const ParamVector& params, const std::filesystem::path& path);
ParamVector load_stack_file(const std::filesystem::path& path);

nlohmann::json report_to_json(const FitReport& report, const FitConfig& cfg);

/// Pretty-printed JSON with a trailing newline; throws Error{io}.
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace lpf
