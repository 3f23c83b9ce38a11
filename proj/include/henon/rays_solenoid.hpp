#pragma once

#include "henon/manifold.hpp"

#include <optional>
#include <string>
#include <vector>

namespace henon {

struct RaySample {
    double level = 0.0;  // target G
    cx z;                // chart point
    cx L;                // lift of log(phi+ o psi) at z
};

struct RayTrace {
    double theta = 0.0;
    double theta_lift = 0.0;  // imaginary part of the lift actually followed
    std::vector<RaySample> samples;
    bool landed = false;
    std::optional<cx> endpoint;
    double endpoint_diameter = 0.0;
    std::optional<double> failure_level;
    std::string failure;
};

struct RayOptions {
    double land_tol = 1e-3;
    int land_window = 8;
    int max_newton = 16;
    int max_substeps = 20000;
    LeafOptions leaf;
};

/// A point on |z| = r maximizing leaf_green, pushed outward by |lambda| until psi lands in V+.
cx find_base_point(const UnstableChart& chart, double r = 1.0, int n_samples = 1024,
                   const LeafOptions& opt = {});

/// Argument-locked continuation of the lift L = log(phi+ o psi): from base_z along
/// Re L = G_start to Im L = theta, then halving the level until it falls below G_stop.
RayTrace trace_ray(const UnstableChart& chart, double theta, double G_start, double G_stop, cx base_z,
                   const RayOptions& opt = {});

struct LandingStats {
    int n_rays = 0;
    int landed = 0;
    double fraction = 0.0;
    std::vector<RayTrace> traces;  // sorted by theta
};

LandingStats landing_stats(const UnstableChart& chart, int n_rays, double G_start, double G_stop,
                           cx base_z, const RayOptions& opt = {});

struct SolenoidWindow {
    int j_min = 0;
    int j_max = 0;
    int j_entry = 0;  // first j with f^j(q) in V+
    std::vector<std::optional<cx>> z;
    std::vector<std::optional<double>> residuals;  // |z_{j+1} - z_j^d| / |z_{j+1}|

    const std::optional<cx>& at(int j) const { return z[static_cast<std::size_t>(j - j_min)]; }
    double max_residual() const;
};

/// Entries only where f^j(q) lies in V+ (direct evaluation). Throws MapError if the
/// forward orbit does not reach V+ within n_max.
SolenoidWindow solenoid_coords(const HenonMap& map, const PointC2& q, int j_min, int j_max,
                               int n_max = 1000);

/// Window for q = psi(z): direct values from the V+ entry on, leafwise continuation
/// from base_z below it.
SolenoidWindow solenoid_coords(const UnstableChart& chart, cx z, cx base_z, int j_min, int j_max,
                               const LeafOptions& opt = {});

}  // namespace henon
