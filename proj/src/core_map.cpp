#include "henon/core_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace henon {

bool PointC2::finite() const {
    return std::isfinite(x.real()) && std::isfinite(x.imag()) && std::isfinite(y.real()) &&
           std::isfinite(y.imag());
}

PointC2 operator+(const PointC2& a, const PointC2& b) { return {a.x + b.x, a.y + b.y}; }
PointC2 operator-(const PointC2& a, const PointC2& b) { return {a.x - b.x, a.y - b.y}; }
PointC2 operator*(cx s, const PointC2& a) { return {s * a.x, s * a.y}; }

double distance(const PointC2& a, const PointC2& b) {
    return std::hypot(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

Mat2 Mat2::inverse() const {
    cx det_ = det();
    return {d / det_, -b / det_, -c / det_, a / det_};
}

double Mat2::norm() const {
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
}

Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
            l.c * r.b + l.d * r.d};
}

MonicPolynomial::MonicPolynomial(std::vector<cx> lower_coeffs, int degree)
    : coeffs_(std::move(lower_coeffs)), degree_(degree) {
    if (degree_ < 2) throw MapError("factor polynomial must have degree >= 2");
    if (static_cast<int>(coeffs_.size()) > degree_)
        throw MapError("too many lower-order coefficients for the stated degree");
    coeffs_.resize(static_cast<std::size_t>(degree_), cx{0.0});
}

cx MonicPolynomial::eval(cx y) const {
    cx acc{1.0};
    for (int k = degree_ - 1; k >= 0; --k) acc = acc * y + coeffs_[static_cast<std::size_t>(k)];
    return acc;
}

cx MonicPolynomial::derivative(cx y) const {
    cx acc{static_cast<double>(degree_)};
    for (int k = degree_ - 1; k >= 1; --k)
        acc = acc * y + static_cast<double>(k) * coeffs_[static_cast<std::size_t>(k)];
    return acc;
}

double MonicPolynomial::coeff_l1() const {
    double s = 0.0;
    for (const cx& c : coeffs_) s += std::abs(c);
    return s;
}

HenonFactor make_factor(std::vector<cx> lower_coeffs, int degree, cx a) {
    if (a == cx{0.0}) throw MapError("factor coefficient a must be nonzero");
    return HenonFactor{MonicPolynomial(std::move(lower_coeffs), degree), a};
}

PointC2 HenonMap::forward(const PointC2& q) const {
    PointC2 r = q;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) r = it->forward(r);
    return r;
}

PointC2 HenonMap::backward(const PointC2& q) const {
    PointC2 r = q;
    for (const HenonFactor& f : factors_) r = f.backward(r);
    return r;
}

const InverseConjugate& HenonMap::inverse_conjugate() const {
    if (!inverse_) throw MapError("inverse conjugate unavailable for this map");
    return *inverse_;
}

std::string HenonMap::describe() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        if (j) os << " o ";
        const auto& f = factors_[j];
        os << "[y^" << f.poly.degree();
        for (int k = f.poly.degree() - 1; k >= 0; --k) {
            cx c = f.poly.coeffs()[static_cast<std::size_t>(k)];
            if (c != cx{0.0}) os << " + (" << c.real() << "," << c.imag() << ")y^" << k;
        }
        os << "; a=(" << f.a.real() << "," << f.a.imag() << ")]";
    }
    return os.str();
}

double closed_form_escape_radius(const std::vector<HenonFactor>& factors) {
    double R = 1.0;
    for (const HenonFactor& f : factors) {
        double C = f.poly.coeff_l1() + std::abs(f.a);
        R = std::max({R, 3.0 + C, 2.0 * C});
    }
    return R;
}

bool verify_escape_radius(const std::vector<HenonFactor>& factors, double R, int grid) {
    if (R <= 1.0 || grid < 1) return false;
    // For fixed y the extremes of |p(y) - a x| over |x| <= R are |p(y)| -+ |a| R, so only
    // the circle |y| = R needs sampling.
    const int samples = grid * grid;
    const double two_pi = 2.0 * std::numbers::pi;
    for (const HenonFactor& f : factors) {
        const int d = f.poly.degree();
        const double Rd = std::pow(R, d);
        const double ax = std::abs(f.a) * R;
        for (int i = 0; i < samples; ++i) {
            const cx y = std::polar(R, two_pi * i / samples);
            const cx py = f.poly.eval(y);
            const double lo = std::abs(py) - ax;
            if (lo < 2.0 * R || lo < 0.5 * Rd || lo <= R) return false;
            if (std::abs(py - std::pow(y, d)) + ax > 0.5 * Rd) return false;
        }
    }
    return true;
}

double escape_radius(const std::vector<HenonFactor>& factors, int grid) {
    const double R0 = closed_form_escape_radius(factors);
    const double step = R0 / 16.0;
    double R = R0;
    for (int k = 1; k < 16; ++k) {
        double cand = R0 - k * step;
        if (!verify_escape_radius(factors, cand, grid)) break;
        R = cand;
    }
    return R;
}

namespace {

void validate(const std::vector<HenonFactor>& factors) {
    if (factors.empty()) throw MapError("a Henon map needs at least one factor");
    for (const HenonFactor& f : factors) {
        if (f.a == cx{0.0}) throw MapError("factor coefficient a must be nonzero");
        if (f.poly.degree() < 2) throw MapError("factor polynomial must have degree >= 2");
    }
}

// sigma o f^-1 o sigma applies (x, y) -> (y, (p_j(y) - x) / a_j) for j = 1..m in that
// order. Rescaling y_t = s_t v_t makes every step monic once s_{t+1} = l_t s_t^{d_t}
// with l_t = 1 / a_t, closed up periodically.
std::shared_ptr<InverseConjugate> build_inverse(const std::vector<HenonFactor>& factors,
                                                int degree, int grid) {
    const std::size_t m = factors.size();
    // application order of the conjugated inverse is f_1^-1 first
    std::vector<cx> lead(m);
    for (std::size_t t = 0; t < m; ++t) lead[t] = 1.0 / factors[t].a;

    // s_m = K s_0^d with K = prod_t l_t^(prod_{u>t} d_u)
    cx logK{0.0};
    for (std::size_t t = 0; t < m; ++t) {
        double tail = 1.0;
        for (std::size_t u = t + 1; u < m; ++u) tail *= factors[u].poly.degree();
        logK += tail * std::log(lead[t]);
    }
    std::vector<cx> s(m + 1);
    s[0] = std::exp(-logK / static_cast<double>(degree - 1));
    for (std::size_t t = 0; t < m; ++t)
        s[t + 1] = lead[t] * std::pow(s[t], factors[t].poly.degree());

    std::vector<HenonFactor> app;  // application order
    for (std::size_t t = 0; t < m; ++t) {
        const HenonFactor& f = factors[t];
        const int d = f.poly.degree();
        const cx s_prev = (t == 0) ? s[m - 1] : s[t - 1];
        std::vector<cx> c(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            c[static_cast<std::size_t>(i)] =
                lead[t] * f.poly.coeffs()[static_cast<std::size_t>(i)] * std::pow(s[t], i) / s[t + 1];
        app.push_back(HenonFactor{MonicPolynomial(std::move(c), d), lead[t] * s_prev / s[t + 1]});
    }
    std::vector<HenonFactor> comp(app.rbegin(), app.rend());
    auto inv = std::make_shared<InverseConjugate>();
    inv->map = std::make_shared<const HenonMap>(make_henon_unverified(
        comp, escape_radius(comp, grid)));
    inv->sx = s[m - 1];
    inv->sy = s[0];
    return inv;
}

}  // namespace

HenonMap make_henon_unverified(std::vector<HenonFactor> factors, double radius) {
    HenonMap map;
    map.degree_ = 1;
    map.jac_ = cx{1.0};
    for (const HenonFactor& f : factors) {
        map.degree_ *= f.poly.degree();
        map.jac_ *= f.a;
    }
    map.factors_ = std::move(factors);
    map.escape_radius_ = radius;
    return map;
}

HenonMap make_henon(std::vector<HenonFactor> factors, int verify_grid) {
    validate(factors);
    HenonMap map = make_henon_unverified(factors, escape_radius(factors, verify_grid));
    map.inverse_ = build_inverse(map.factors_, map.degree_, verify_grid);
    return map;
}

PointC2 apply(const HenonMap& map, const PointC2& q, Direction dir) {
    return dir == Direction::Forward ? map.forward(q) : map.backward(q);
}

PointC2 apply_n(const HenonMap& map, const PointC2& q, int n, Direction dir) {
    PointC2 r = q;
    for (int i = 0; i < n; ++i) r = apply(map, r, dir);
    return r;
}

Mat2 jacobian(const HenonMap& map, const PointC2& q, int n, Direction dir) {
    if (n < 1) throw MapError("jacobian needs n >= 1");
    Mat2 acc = Mat2::identity();
    PointC2 r = q;
    const auto& fs = map.factors();
    for (int i = 0; i < n; ++i) {
        if (dir == Direction::Forward) {
            for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
                acc = it->jacobian(r) * acc;
                r = it->forward(r);
            }
        } else {
            for (const HenonFactor& f : fs) {
                // D(f_j^-1) at r: (x, y) -> ((p(x) - y)/a, x)
                Mat2 jinv{f.poly.derivative(r.x) / f.a, -1.0 / f.a, 1.0, 0.0};
                acc = jinv * acc;
                r = f.backward(r);
            }
        }
    }
    return acc;
}

EscapeRun escape_forward(const HenonMap& map, PointC2 q, int n_max, int cycle_check_from) {
    constexpr int kHistory = 8;
    std::array<PointC2, kHistory> hist{};
    int filled = 0;
    EscapeRun run;
    for (int step = 0;; ++step) {
        if (!q.finite() || q.norm_inf() > kOverflowMagnitude) {
            run.fate = Fate::Escaped;
            run.steps = step;
            run.point = q;
            return run;
        }
        if (map.in_vplus(q)) {
            run.fate = Fate::Escaped;
            run.steps = step;
            run.point = q;
            return run;
        }
        if (step >= cycle_check_from && map.in_box(q)) {
            const double tol = 1e-12 * (1.0 + q.norm_inf());
            for (int k = 0; k < filled; ++k) {
                const PointC2& h = hist[static_cast<std::size_t>(k)];
                if (std::abs(h.x - q.x) < tol && std::abs(h.y - q.y) < tol) {
                    run.fate = Fate::Bounded;
                    run.steps = step;
                    run.point = q;
                    return run;
                }
            }
            // shift history, most recent first
            for (int k = std::min(filled, kHistory - 1); k > 0; --k)
                hist[static_cast<std::size_t>(k)] = hist[static_cast<std::size_t>(k - 1)];
            hist[0] = q;
            filled = std::min(filled + 1, kHistory);
        } else {
            filled = 0;
        }
        if (step >= n_max) break;
        q = map.forward(q);
    }
    run.steps = n_max;
    run.point = q;
    run.fate = map.in_box(q) ? Fate::Bounded : Fate::Undetermined;
    return run;
}

namespace {

EscapeRun escape_backward(const HenonMap& map, const PointC2& q, int n_max) {
    const InverseConjugate& inv = map.inverse_conjugate();
    EscapeRun r = escape_forward(*inv.map, inv.to_conjugate(q), n_max);
    r.point = inv.from_conjugate(r.point);
    // the conjugate's box differs from ours; re-judge exhaustion in our coordinates
    if (r.fate != Fate::Escaped && r.steps >= n_max)
        r.fate = map.in_box(r.point) ? Fate::Bounded : Fate::Undetermined;
    return r;
}

}  // namespace

OrbitClass orbit_classify(const HenonMap& map, const PointC2& q, int n_max) {
    if (n_max < 1) throw MapError("orbit_classify needs N_max >= 1");
    OrbitClass oc;
    oc.budget = n_max;
    EscapeRun fw = escape_forward(map, q, n_max);
    oc.forward = fw.fate;
    oc.forward_steps = fw.steps;
    if (fw.fate == Fate::Escaped) {
        oc.tag = OrbitTag::EscapesForward;
        oc.steps = fw.steps;
        return oc;
    }
    EscapeRun bw = escape_backward(map, q, n_max);
    oc.backward = bw.fate;
    oc.backward_steps = bw.steps;
    if (bw.fate == Fate::Escaped) {
        oc.tag = OrbitTag::EscapesBackward;
        oc.steps = bw.steps;
        return oc;
    }
    if (fw.fate == Fate::Bounded && bw.fate == Fate::Bounded) {
        oc.tag = OrbitTag::BoundedBoth;
        oc.steps = n_max;
        return oc;
    }
    oc.tag = OrbitTag::Undetermined;
    oc.steps = n_max;
    return oc;
}

std::string to_string(OrbitTag tag) {
    switch (tag) {
        case OrbitTag::EscapesForward: return "EscapesForward";
        case OrbitTag::EscapesBackward: return "EscapesBackward";
        case OrbitTag::BoundedBoth: return "BoundedBoth";
        case OrbitTag::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

}  // namespace henon
