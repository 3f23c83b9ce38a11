#pragma once

#include "henon/manifold.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace henon {

enum class CellClass : std::uint8_t { Kplus, Uplus, Undetermined };

/// m x m cells over [-r, r]^2; cell (i, j) is centered at h((i - m/2) + i(m/2 - j)), h = 2r/m,
/// so the center cell sits exactly at z = 0. Topology is taken on cells with |z| <= r.
struct SliceRaster {
    double r = 0.0;
    int m = 0;
    double tol = 0.0;
    int n_max = 0;
    std::vector<double> green;
    std::vector<CellClass> cls;
    std::vector<int> steps;

    double h() const { return 2.0 * r / m; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * m + i; }
    cx center(int i, int j) const { return h() * cx{i - m / 2.0, m / 2.0 - j}; }
    bool in_disk(int i, int j) const { return std::abs(center(i, j)) <= r; }
    int disk_cells() const;
    int undetermined_cells() const;
    double undetermined_fraction() const;
};

SliceRaster rasterize_slice(const UnstableChart& chart, double r, int m, double tol = 1e-10,
                            int n_max = 1000);

/// Raster with the given classes and values, for tests and replays.
SliceRaster make_raster(double r, int m, std::vector<CellClass> cls, std::vector<double> green);

enum class Phase { Kplus, Uplus };

struct Component {
    int id = 0;
    Phase phase = Phase::Uplus;
    int cells = 0;
    bool touches_boundary = false;
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0;  // bounding box in cell indices
    double max_green = 0.0;
};

enum class EndClass { Growth, Decay, Unclassified };

struct EndRecord {
    int component = 0;  // Uplus component containing the end
    std::vector<double> s;
    std::vector<double> M;  // NaN where the end has no cells at that radius
    double M_ring = 0.0;
    EndClass cls = EndClass::Unclassified;
    double t0 = 0.0;                // first radius violating the decay bound
    double growth_constant = 0.0;   // min over sampled s of M/sqrt(s)
};

struct RingLevel {
    double ring_radius = 0.0;
    int c = 0;
    int g = 0;
    int unclassified = 0;
    std::vector<EndRecord> ends;
};

struct Witness {
    int component = 0;
    int cells = 0;
    cx lo, hi;  // loop rectangle corners in chart coordinates
    int expand = 0;
    double charge = 0.0;
    double charge_err = 0.0;
};

struct ComponentReport {
    double r = 0.0;
    int m = 0;
    std::vector<Component> components;
    std::vector<int> labels;  // per cell, -1 outside the disk or undetermined
    int n_kplus = 0;
    int n_uplus = 0;
    std::vector<int> interior_kplus;  // Kplus components not touching the boundary
    std::vector<RingLevel> levels;
    std::vector<Witness> witnesses;
    int candidates_skipped = 0;
    int undetermined = 0;
    double undetermined_fraction = 0.0;
    std::vector<double> uplus_s;
    std::vector<double> uplus_M;
    double uplus_slope = 0.0;
    std::vector<std::string> warnings;
};

/// Union-find labeling: Kplus with 4-connectivity, Uplus with 8-connectivity.
ComponentReport label_components(const SliceRaster& raster);

/// Decay test against M_ring * 4 sqrt(ring / s); fewer than 3 finite samples is Unclassified.
EndRecord classify_end_samples(double ring_radius, double M_ring, const std::vector<double>& s,
                               const std::vector<double>& M);

/// Ends of Uplus components outside each ring radius, sampled at 8 log-spaced radii.
void classify_ends(const SliceRaster& raster, ComponentReport& report,
                   const std::vector<double>& ring_radii);

/// Loop charges on rectangles around interior Kplus components; keeps those above min_charge.
void evaluate_witnesses(const UnstableChart& chart, const SliceRaster& raster, ComponentReport& report,
                        const LeafOptions& opt = {}, double min_charge = 1e-4, int max_candidates = 200);

enum class VerdictStatus { UnstablyDisconnected, UnstablyConnectedEvidence, Inconclusive };

struct VerdictParams {
    std::vector<double> r_schedule;  // empty: |lambda|^1 .. |lambda|^6
    int m = 1024;
    double tol = 1e-10;
    int n_max = 1000;
    int n_samples = 1024;
    double min_charge = 1e-4;
    double max_undetermined = 0.01;
};

struct LevelSummary {
    double r = 0.0;
    int m = 0;
    int n_kplus = 0;
    int n_uplus = 0;
    int undetermined = 0;
    double undetermined_fraction = 0.0;
    std::vector<RingLevel> rings;
    std::vector<Witness> witnesses;
    double uplus_slope = 0.0;
};

struct Verdict {
    VerdictStatus status = VerdictStatus::Inconclusive;
    std::string reason;
    std::string j_connectivity;
    bool analyzed_inverse = false;
    std::optional<Witness> witness;
    double witness_r = 0.0;
    double r_max = 0.0;
    int m = 0;
    int g_bound = 0;
    bool g_bound_applies = false;
    std::vector<LevelSummary> levels;
    std::vector<LevelSummary> refinement;  // 2m re-runs
    std::vector<std::string> warnings;
};

/// The raster of the last level computed at resolution m, for rendering.
struct VerdictRun {
    Verdict verdict;
    SliceRaster last_raster;
};

struct SliceAnalysis {
    SliceRaster raster;
    ComponentReport report;
};

/// Raster, labels, ends at rings r/32, r/16, r/8, and witnesses for one view radius.
SliceAnalysis analyze_slice(const UnstableChart& chart, double r, int m, const VerdictParams& params);

/// Expects a normalized chart of the analyzed map.
VerdictRun connectivity_verdict(const UnstableChart& chart, const VerdictParams& params);

int g_bound(int degree, double lyap);

std::string to_string(VerdictStatus s);
std::string to_string(EndClass c);

}  // namespace henon
