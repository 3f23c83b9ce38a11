#pragma once

#include "henon/periodic.hpp"
#include "henon/rays_solenoid.hpp"
#include "henon/slice_topology.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace henon {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "henon-lab/1";
inline constexpr const char* kToolVersion = "0.1.0";

/// Sorted keys, 17 significant digits, no whitespace; NaN and infinities become strings.
std::string canonical_json(const Json& doc);

/// Writes canonical_json(doc) plus a trailing newline. Throws std::runtime_error.
void write_report(const Json& doc, const std::filesystem::path& path);

/// Empty document carrying the schema, tool version and command name.
Json new_document(const std::string& command);

struct Palette {
    double hue_per_log = 0.15;  // hue turns per unit of log G
    double saturation = 0.8;
};

std::string ppm_bytes(const SliceRaster& raster, const Palette& palette = {});
void write_ppm(const SliceRaster& raster, const Palette& palette, const std::filesystem::path& path);

Json to_json(cx z);
Json to_json(const PointC2& q);
Json to_json(const HenonMap& map);
Json to_json(const PeriodicOrbit& orbit, const Classification& cls);
Json to_json(const SaddleOrbit& saddle);
Json chart_diagnostics(const UnstableChart& chart, int n_samples, const LeafOptions& opt);
Json to_json(const Witness& w);
Json to_json(const RingLevel& ring);
Json to_json(const ComponentReport& report);
Json to_json(const LevelSummary& level);
Json to_json(const Verdict& verdict, const VerdictParams& params);
Json to_json(const LandingStats& stats, const RayOptions& opt, double G_start, double G_stop);
Json to_json(const SolenoidWindow& w);

}  // namespace henon
