#pragma once

#include "henon/core_map.hpp"

#include <limits>

namespace henon {

enum class Side { Plus, Minus };

struct GreenValue {
    double value = 0.0;
    double err = 0.0;  // +inf marks an undetermined orbit
    Side side = Side::Plus;
    Fate fate = Fate::Undetermined;
    int steps = 0;     // pre-iterates before V+ entry (or budget used)
    int terms = 0;     // series terms summed inside V+

    bool undetermined() const { return fate == Fate::Undetermined; }
};

struct BottcherValue {
    cx z;      // phi+(q)
    cx log_z;  // the lift used to build z
    double err = 0.0;
};

/// log phi+ on V+ built from the product of per-factor ratios, principal Log on each.
struct LogBottcher {
    cx value;
    double err = 0.0;
    int terms = 0;
};

/// Requires q in V+ at the certified radius; throws MapError otherwise.
LogBottcher log_bottcher_vplus(const HenonMap& map, const PointC2& q, double tol = 1e-14);

/// Same series with the derivative of log phi+ along the tangent vector dq.
LogBottcher log_bottcher_vplus(const HenonMap& map, const PointC2& q, const PointC2& dq,
                               cx& dlog, double tol = 1e-14);

BottcherValue bottcher_vplus(const HenonMap& map, const PointC2& q, double tol = 1e-14);

GreenValue green(const HenonMap& map, const PointC2& q, Side side = Side::Plus,
                 double tol = 1e-13, int n_max = 1000);

/// G+ of the orbit continued from an already computed escape run.
GreenValue green_from_run(const HenonMap& map, const EscapeRun& run, double tol);

}  // namespace henon
