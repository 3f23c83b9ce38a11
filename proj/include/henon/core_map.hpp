#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace henon {

using cx = std::complex<double>;

/// Magnitude above which an orbit is treated as escaped without further arithmetic.
inline constexpr double kOverflowMagnitude = 1e150;

class MapError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PointC2 {
    cx x;
    cx y;

    double norm_inf() const { return std::max(std::abs(x), std::abs(y)); }
    bool finite() const;
};

PointC2 operator+(const PointC2& a, const PointC2& b);
PointC2 operator-(const PointC2& a, const PointC2& b);
PointC2 operator*(cx s, const PointC2& a);
double distance(const PointC2& a, const PointC2& b);

/// 2x2 complex matrix [[a, b], [c, d]].
struct Mat2 {
    cx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static Mat2 identity() { return {}; }
    cx det() const { return a * d - b * c; }
    cx trace() const { return a + d; }
    Mat2 inverse() const;
    double norm() const;  // Frobenius
    PointC2 apply(const PointC2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
};

Mat2 operator*(const Mat2& l, const Mat2& r);

/// y^degree + sum coeffs[k] y^k, k < degree.
class MonicPolynomial {
public:
    MonicPolynomial(std::vector<cx> lower_coeffs, int degree);

    int degree() const { return degree_; }
    const std::vector<cx>& coeffs() const { return coeffs_; }
    cx eval(cx y) const;
    cx derivative(cx y) const;
    /// Sum of moduli of the non-leading coefficients.
    double coeff_l1() const;

private:
    std::vector<cx> coeffs_;  // size == degree_, ascending
    int degree_;
};

/// (x, y) -> (y, p(y) - a x)
struct HenonFactor {
    MonicPolynomial poly;
    cx a;

    PointC2 forward(const PointC2& q) const { return {q.y, poly.eval(q.y) - a * q.x}; }
    PointC2 backward(const PointC2& q) const { return {(poly.eval(q.x) - q.y) / a, q.x}; }
    Mat2 jacobian(const PointC2& q) const { return {0.0, 1.0, -a, poly.derivative(q.y)}; }
};

enum class Direction { Forward, Backward };

class HenonMap;

/// Data for evaluating G^- through the forward machinery: with sigma(x, y) = (y, x),
/// sigma o f^-1 o sigma = L o g o L^-1 where L(u, v) = (sx u, sy v) and g is monic.
struct InverseConjugate {
    std::shared_ptr<const HenonMap> map;
    cx sx;
    cx sy;

    /// Point in g-coordinates corresponding to q in f-coordinates.
    PointC2 to_conjugate(const PointC2& q) const { return {q.y / sx, q.x / sy}; }
    PointC2 from_conjugate(const PointC2& u) const { return {sy * u.y, sx * u.x}; }
};

/// Composition f = f_1 o ... o f_m; f_m is applied first.
class HenonMap {
public:
    const std::vector<HenonFactor>& factors() const { return factors_; }
    int degree() const { return degree_; }
    cx jac() const { return jac_; }
    double escape_radius() const { return escape_radius_; }
    const InverseConjugate& inverse_conjugate() const;

    PointC2 forward(const PointC2& q) const;
    PointC2 backward(const PointC2& q) const;

    bool in_vplus(const PointC2& q) const {
        double ay = std::abs(q.y);
        return ay > escape_radius_ && ay > std::abs(q.x);
    }
    bool in_vminus(const PointC2& q) const {
        double ax = std::abs(q.x);
        return ax > escape_radius_ && ax > std::abs(q.y);
    }
    bool in_box(const PointC2& q) const { return q.norm_inf() <= escape_radius_; }

    std::string describe() const;

private:
    friend HenonMap make_henon(std::vector<HenonFactor> factors, int verify_grid);
    friend HenonMap make_henon_unverified(std::vector<HenonFactor> factors, double radius);

    std::vector<HenonFactor> factors_;
    int degree_ = 0;
    cx jac_{1.0};
    double escape_radius_ = 0.0;
    std::shared_ptr<InverseConjugate> inverse_;
};

HenonFactor make_factor(std::vector<cx> lower_coeffs, int degree, cx a);

/// Validates factors and certifies an escape radius. Throws MapError.
HenonMap make_henon(std::vector<HenonFactor> factors, int verify_grid = 64);

/// Builds the map with a caller-supplied radius and no inverse data.
HenonMap make_henon_unverified(std::vector<HenonFactor> factors, double radius);

PointC2 apply(const HenonMap& map, const PointC2& q, Direction dir);
PointC2 apply_n(const HenonMap& map, const PointC2& q, int n, Direction dir);

/// Chain-rule Jacobian of f^n (or f^-n) at q.
Mat2 jacobian(const HenonMap& map, const PointC2& q, int n, Direction dir);

/// Closed-form radius that satisfies the filtration inequalities for every factor.
double closed_form_escape_radius(const std::vector<HenonFactor>& factors);

/// Checks, for every factor, |y'| >= 2|y|, |y'| >= |y|^d / 2, |y'| > |x'| and
/// |y'/y^d - 1| <= 1/2 on |y| = R (grid^2 samples), bounding |x| <= R analytically.
bool verify_escape_radius(const std::vector<HenonFactor>& factors, double R, int grid = 64);

/// Closed-form bound tightened by decrement-and-verify.
double escape_radius(const std::vector<HenonFactor>& factors, int grid = 64);

enum class OrbitTag { EscapesForward, EscapesBackward, BoundedBoth, Undetermined };

enum class Fate { Escaped, Bounded, Undetermined };

struct OrbitClass {
    OrbitTag tag = OrbitTag::Undetermined;
    int steps = 0;  // first entry step for the escaping tags
    int budget = 0;
    Fate forward = Fate::Undetermined;
    Fate backward = Fate::Undetermined;
    int forward_steps = 0;
    int backward_steps = 0;
};

struct EscapeRun {
    Fate fate = Fate::Undetermined;
    int steps = 0;
    PointC2 point;  // entry point into V+ when escaped, last point otherwise
};

/// Forward iteration until V+ entry, budget exhaustion or convergence onto a cycle of
/// period <= 8. Cycle detection is enabled from step cycle_check_from on.
EscapeRun escape_forward(const HenonMap& map, PointC2 q, int n_max, int cycle_check_from = 0);

OrbitClass orbit_classify(const HenonMap& map, const PointC2& q, int n_max);

std::string to_string(OrbitTag tag);

}  // namespace henon
