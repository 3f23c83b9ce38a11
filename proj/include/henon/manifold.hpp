#pragma once

#include "henon/periodic.hpp"
#include "henon/potential.hpp"

#include <stdexcept>
#include <variant>
#include <vector>

namespace henon {

class ResonanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LeafPathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// psi : C -> W^u(p) with F(psi(z)) = psi(lambda z), F = f^period.
struct UnstableChart {
    HenonMap map;
    SaddleOrbit saddle;
    PointC2 base;       // psi(0); differs from saddle.base() for pushed-forward charts
    cx multiplier;      // lambda
    std::vector<PointC2> coeffs;
    double alpha = 1.0;  // accumulated scale relative to the solved chart
    double rho_val = 0.0;
    int n_series = 0;

    int period() const { return saddle.period; }
};

struct LeafOptions {
    double tol = 1e-13;
    int n_max = 1000;
};

UnstableChart solve_chart(const HenonMap& map, const SaddleOrbit& saddle, int n_series = 60);

/// psi(z) = chart(s z); coefficients scaled by s^k.
UnstableChart rescale_chart(const UnstableChart& chart, double s);

/// Chart f^j o psi at f^j(p), same multiplier.
UnstableChart push_forward(const UnstableChart& chart, int j);

PointC2 eval_series(const UnstableChart& chart, cx z);
PointC2 eval_series(const UnstableChart& chart, cx z, PointC2& dpsi);
PointC2 eval_chart(const UnstableChart& chart, cx z);

/// Number of F-steps used by eval_chart at z.
int pullback_steps(const UnstableChart& chart, cx z);

/// Orbit data for psi(z): the V+ entry is at index `entry` relative to psi(z) (may be
/// negative when the pulled-back seed already reaches V+ earlier), `ell` is log phi+ there.
struct LeafLog {
    Fate fate = Fate::Undetermined;
    int entry = 0;
    cx ell;
    cx dell;  // d ell / dz, only when requested
    double green = 0.0;
    double err = 0.0;
};

LeafLog leaf_log(const UnstableChart& chart, cx z, const LeafOptions& opt, bool tangent);

GreenValue leaf_green(const UnstableChart& chart, cx z, const LeafOptions& opt = {});

/// max of leaf_green over |z| = r: equispaced samples plus golden-section refinement.
double max_modulus(const UnstableChart& chart, double r, int n_samples = 1024,
                   const LeafOptions& opt = {});

/// Rescales so that M(p, 1) = 1.
UnstableChart normalize_chart(const UnstableChart& chart, int n_samples = 1024,
                              const LeafOptions& opt = {});

/// ||Df^j restricted to E^u||_G at the chart base, from the normalization of f^j o psi.
double g_norm(const UnstableChart& normalized, int j, int n_samples = 1024,
              const LeafOptions& opt = {});

/// Lifts of log(phi+ o psi)(z) form ell / d^E + 2 pi i m / d^E; returns the one whose
/// imaginary part is nearest im_ref, along with the spacing 2 pi / d^max(E,0).
cx nearest_lift(const UnstableChart& chart, const LeafLog& ll, double im_ref, double* spacing = nullptr);

/// Derivative of the lift with respect to z.
cx lift_derivative(const UnstableChart& chart, const LeafLog& ll);

/// Continues log(phi+ o psi) from (z_from, L_from) along the segment to z_to with a
/// derivative predictor; throws LeafPathError if the segment meets K+.
cx continue_log(const UnstableChart& chart, cx z_from, cx L_from, cx z_to,
                const LeafOptions& opt = {});

/// Value of log(phi+ o psi) at a base point whose image lies in V+, principal branch.
cx base_log(const UnstableChart& chart, cx base_z, const LeafOptions& opt = {});

/// exp of the logarithm continued from base_z along the straight segment to z; throws
/// LeafPathError when the segment meets K+.
BottcherValue leaf_bottcher(const UnstableChart& chart, cx z, cx base_z,
                            const LeafOptions& opt = {});

struct CircleLoop {
    cx center;
    double radius;
};
using PolygonLoop = std::vector<cx>;  // counter-clockwise vertices
using Loop = std::variant<CircleLoop, PolygonLoop>;

struct LoopCharge {
    double value = 0.0;  // (1/2pi) * outward flux of grad G
    double err = 0.0;
    double min_green = 0.0;
};

LoopCharge loop_charge(const UnstableChart& chart, const Loop& loop, const LeafOptions& opt = {},
                       double quad_tol = 1e-11);

}  // namespace henon
