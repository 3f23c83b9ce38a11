#pragma once

#include "henon/core_map.hpp"

#include <vector>

namespace henon {

struct PeriodicOrbit {
    std::vector<PointC2> points;  // canonical rotation: lexicographically smallest first
    int period = 1;               // minimal period
    double residual = 0.0;        // max over points of |f^period(p) - p|
};

struct SaddleOrbit {
    std::vector<PointC2> points;
    int period = 1;
    cx lam_u;
    cx lam_s;
    PointC2 v_u;
    PointC2 v_s;
    double lyap = 0.0;
    double residual = 0.0;

    const PointC2& base() const { return points.front(); }
};

enum class OrbitKind { Saddle, Sink, Source, Indeterminate };

struct Classification {
    OrbitKind kind = OrbitKind::Indeterminate;
    cx lambda1;  // larger modulus
    cx lambda2;
    PointC2 v1;
    PointC2 v2;
    SaddleOrbit saddle;  // filled when kind == Saddle
};

/// Newton search for orbits whose minimal period divides n. Sorted by period, then
/// lexicographically by the canonical first point.
std::vector<PeriodicOrbit> find_periodic(const HenonMap& map, int n, double box, int seed_grid);

/// Lexicographic order on (Re x, Im x, Re y, Im y) with ties below 1e-9.
bool lex_less(const PointC2& a, const PointC2& b);

OrbitKind kind_from_multipliers(cx lambda1, cx lambda2, double margin = 1e-6);

/// Eigen-data of Df^n at points[0]; eigenvectors unit length, first nonzero entry real positive.
Classification classify(const HenonMap& map, const std::vector<PointC2>& points, int n);

std::string to_string(OrbitKind kind);

/// Saddles among all orbits of period dividing n, in find_periodic order.
std::vector<SaddleOrbit> find_saddles(const HenonMap& map, int n, double box, int seed_grid);

}  // namespace henon
